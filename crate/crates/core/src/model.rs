//! Outcomes, polarizer orientations, probability and count tables.
//!
//! A setting pairs one orientation on the first side (`a`, `a'` or `r`) with
//! one on the second side (`b`, `b'` or `r`). Labels are always written
//! first-side first, so the pair usually printed as `(b', a)` is `a:b'`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of an analytic probability table.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// Result of one photon hitting a two-channel polarizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    /// Ordinary ray detected.
    Plus,
    /// Extraordinary ray detected.
    Minus,
    /// No count on either detector of that side.
    Undetected,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Minus, Outcome::Undetected];
    pub const DETECTED: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub const fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
            Outcome::Undetected => 2,
        }
    }

    /// +1, -1, or 0 for a missing count.
    pub const fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
            Outcome::Undetected => 0.0,
        }
    }

    pub const fn is_detected(self) -> bool {
        !matches!(self, Outcome::Undetected)
    }

    pub const fn symbol(self) -> &'static str {
        match self {
            Outcome::Plus => "+",
            Outcome::Minus => "-",
            Outcome::Undetected => "0",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Outcome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" => Ok(Outcome::Plus),
            "-" => Ok(Outcome::Minus),
            "0" => Ok(Outcome::Undetected),
            other => Err(Error::InvalidCounts(format!("unknown outcome `{other}`"))),
        }
    }
}

/// Named polarizer orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    A,
    APrime,
    B,
    BPrime,
    R,
}

impl Axis {
    /// Order used on the command line: a, b, a', b', r.
    pub const CLI_ORDER: [Axis; 5] = [Axis::A, Axis::B, Axis::APrime, Axis::BPrime, Axis::R];

    pub const fn label(self) -> &'static str {
        match self {
            Axis::A => "a",
            Axis::APrime => "a'",
            Axis::B => "b",
            Axis::BPrime => "b'",
            Axis::R => "r",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" => Ok(Axis::A),
            "a'" | "a′" | "a_prime" => Ok(Axis::APrime),
            "b" => Ok(Axis::B),
            "b'" | "b′" | "b_prime" => Ok(Axis::BPrime),
            "r" => Ok(Axis::R),
            other => Err(Error::UnknownAxis(other.to_string())),
        }
    }
}

/// A polarizer-pair setting, first side then second side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Setting {
    AB,
    ABPrime,
    APrimeB,
    APrimeBPrime,
    APrimeR,
    RBPrime,
    RR,
}

impl Setting {
    pub const ALL: [Setting; 7] = [
        Setting::AB,
        Setting::ABPrime,
        Setting::APrimeB,
        Setting::APrimeBPrime,
        Setting::APrimeR,
        Setting::RBPrime,
        Setting::RR,
    ];

    pub const fn axes(self) -> (Axis, Axis) {
        match self {
            Setting::AB => (Axis::A, Axis::B),
            Setting::ABPrime => (Axis::A, Axis::BPrime),
            Setting::APrimeB => (Axis::APrime, Axis::B),
            Setting::APrimeBPrime => (Axis::APrime, Axis::BPrime),
            Setting::APrimeR => (Axis::APrime, Axis::R),
            Setting::RBPrime => (Axis::R, Axis::BPrime),
            Setting::RR => (Axis::R, Axis::R),
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            Setting::AB => "a:b",
            Setting::ABPrime => "a:b'",
            Setting::APrimeB => "a':b",
            Setting::APrimeBPrime => "a':b'",
            Setting::APrimeR => "a':r",
            Setting::RBPrime => "r:b'",
            Setting::RR => "r:r",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownSetting(s.to_string());
        let (first, second) = s.split_once(':').ok_or_else(unknown)?;
        let first: Axis = first.parse().map_err(|_| unknown())?;
        let second: Axis = second.parse().map_err(|_| unknown())?;
        Setting::ALL
            .into_iter()
            .find(|setting| setting.axes() == (first, second))
            .ok_or_else(unknown)
    }
}

/// Reduce an angle in degrees to `[0, 180)`.
pub fn reduce_angle(delta_deg: f64) -> Result<f64> {
    if !delta_deg.is_finite() {
        return Err(Error::NonFiniteAngle(delta_deg));
    }
    Ok(fold_angle(delta_deg))
}

/// Infallible reduction for values already known to be finite.
pub(crate) fn fold_angle(delta_deg: f64) -> f64 {
    let reduced = delta_deg.rem_euclid(180.0);
    // rem_euclid can round up to the modulus for tiny negative inputs
    if reduced >= 180.0 {
        0.0
    } else {
        reduced
    }
}

/// The five polarizer orientations in degrees, each reduced to `[0, 180)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleConfig {
    a: f64,
    a_prime: f64,
    b: f64,
    b_prime: f64,
    r: f64,
}

impl AngleConfig {
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64, r: f64) -> Result<Self> {
        Ok(Self {
            a: reduce_angle(a)?,
            a_prime: reduce_angle(a_prime)?,
            b: reduce_angle(b)?,
            b_prime: reduce_angle(b_prime)?,
            r: reduce_angle(r)?,
        })
    }

    /// Build from the command-line order a, b, a', b', r.
    pub fn from_cli_order(angles: [f64; 5]) -> Result<Self> {
        let [a, b, a_prime, b_prime, r] = angles;
        Self::new(a, a_prime, b, b_prime, r)
    }

    pub fn to_cli_order(&self) -> [f64; 5] {
        [self.a, self.b, self.a_prime, self.b_prime, self.r]
    }

    pub fn angle(&self, axis: Axis) -> f64 {
        match axis {
            Axis::A => self.a,
            Axis::APrime => self.a_prime,
            Axis::B => self.b,
            Axis::BPrime => self.b_prime,
            Axis::R => self.r,
        }
    }

    pub fn with_angle(mut self, axis: Axis, deg: f64) -> Result<Self> {
        let deg = reduce_angle(deg)?;
        match axis {
            Axis::A => self.a = deg,
            Axis::APrime => self.a_prime = deg,
            Axis::B => self.b = deg,
            Axis::BPrime => self.b_prime = deg,
            Axis::R => self.r = deg,
        }
        Ok(self)
    }

    /// Orientation difference (first side minus second side) of a setting.
    pub fn difference(&self, setting: Setting) -> f64 {
        let (first, second) = setting.axes();
        fold_angle(self.angle(first) - self.angle(second))
    }

    /// `(a-b, b'-a, b-a', a'-b')`, each reduced to `[0, 180)`.
    pub fn canonical_differences(&self) -> [f64; 4] {
        [
            fold_angle(self.a - self.b),
            fold_angle(self.b_prime - self.a),
            fold_angle(self.b - self.a_prime),
            fold_angle(self.a_prime - self.b_prime),
        ]
    }
}

/// Probability of each (first-side, second-side) outcome pair for one setting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution {
    p: [[f64; 3]; 3],
}

impl JointDistribution {
    /// Validate a full 3x3 table indexed by [`Outcome::index`].
    pub fn new(p: [[f64; 3]; 3]) -> Result<Self> {
        let mut total = 0.0;
        for (i, row) in p.iter().enumerate() {
            for (j, &value) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::InvalidDistribution(format!(
                        "entry ({}, {}) = {value} outside [0, 1]",
                        Outcome::ALL[i],
                        Outcome::ALL[j]
                    )));
                }
                total += value;
            }
        }
        if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, expected 1"
            )));
        }
        Ok(Self { p })
    }

    /// Complete a table from its four coincidence entries and both sides'
    /// singles `[p+, p-]`. The one-sided entries follow from marginal
    /// consistency and the both-undetected entry absorbs the remainder.
    pub fn from_coincidences(
        coincidences: [[f64; 2]; 2],
        first_singles: [f64; 2],
        second_singles: [f64; 2],
    ) -> Result<Self> {
        let mut p = [[0.0; 3]; 3];
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = coincidences[i][j];
            }
        }
        for i in 0..2 {
            p[i][2] = first_singles[i] - coincidences[i][0] - coincidences[i][1];
            p[2][i] = second_singles[i] - coincidences[0][i] - coincidences[1][i];
        }
        let detected: f64 = p.iter().flatten().sum();
        p[2][2] = 1.0 - detected;

        for row in p.iter_mut() {
            for value in row.iter_mut() {
                if *value < 0.0 {
                    if *value < -PROBABILITY_TOLERANCE {
                        return Err(Error::InconsistentMarginals(format!(
                            "singles {first_singles:?} / {second_singles:?} are smaller \
                             than the coincidences they contain"
                        )));
                    }
                    *value = 0.0;
                }
            }
        }
        Self::new(p)
    }

    pub fn get(&self, first: Outcome, second: Outcome) -> f64 {
        self.p[first.index()][second.index()]
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.p
    }

    /// `p++ - p+- - p-+ + p--`; undetected outcomes contribute nothing.
    pub fn expectation(&self) -> f64 {
        let p = &self.p;
        p[0][0] - p[0][1] - p[1][0] + p[1][1]
    }

    /// Single-count probability on the first side (row marginal).
    pub fn first_single(&self, outcome: Outcome) -> f64 {
        self.p[outcome.index()].iter().sum()
    }

    /// Single-count probability on the second side (column marginal).
    pub fn second_single(&self, outcome: Outcome) -> f64 {
        self.p.iter().map(|row| row[outcome.index()]).sum()
    }

    /// Probability that both sides register a count, the `K` of a setting.
    pub fn detected_coincidences(&self) -> f64 {
        let p = &self.p;
        p[0][0] + p[0][1] + p[1][0] + p[1][1]
    }
}

/// `p^{±±} ... = n/N`.
pub fn expectation(d: &JointDistribution) -> f64 {
    d.expectation()
}

/// Integer tallies for one setting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    n: [[u64; 3]; 3],
    total_pairs: u64,
}

impl CountTable {
    pub fn new(n: [[u64; 3]; 3]) -> Self {
        let total_pairs = n.iter().flatten().sum();
        Self { n, total_pairs }
    }

    /// Build with an explicit total, which must match the entries.
    pub fn with_total(n: [[u64; 3]; 3], total_pairs: u64) -> Result<Self> {
        let table = Self::new(n);
        if table.total_pairs != total_pairs {
            return Err(Error::InvalidCounts(format!(
                "entries sum to {}, declared total {total_pairs}",
                table.total_pairs
            )));
        }
        Ok(table)
    }

    pub fn get(&self, first: Outcome, second: Outcome) -> u64 {
        self.n[first.index()][second.index()]
    }

    pub fn entries(&self) -> &[[u64; 3]; 3] {
        &self.n
    }

    pub fn total_pairs(&self) -> u64 {
        self.total_pairs
    }

    /// Multiply every entry, keeping frequencies unchanged.
    pub fn scaled(&self, factor: u64) -> Self {
        let mut n = self.n;
        n.iter_mut().flatten().for_each(|v| *v *= factor);
        Self::new(n)
    }
}

/// Relative frequencies of a count table.
pub fn empirical_distribution(c: &CountTable) -> Result<JointDistribution> {
    if c.total_pairs == 0 {
        return Err(Error::EmptyRun);
    }
    let total = c.total_pairs as f64;
    let mut p = [[0.0; 3]; 3];
    for (row, counts) in p.iter_mut().zip(c.n.iter()) {
        for (value, &count) in row.iter_mut().zip(counts.iter()) {
            *value = count as f64 / total;
        }
    }
    JointDistribution::new(p)
}

/// Joint distributions keyed by setting.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SettingsTable {
    tables: BTreeMap<Setting, JointDistribution>,
}

impl SettingsTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, setting: Setting, table: JointDistribution) {
        self.tables.insert(setting, table);
    }

    pub fn with(mut self, setting: Setting, table: JointDistribution) -> Self {
        self.insert(setting, table);
        self
    }

    pub fn get(&self, setting: Setting) -> Result<&JointDistribution> {
        self.tables
            .get(&setting)
            .ok_or(Error::MissingSetting(setting))
    }

    pub fn contains(&self, setting: Setting) -> bool {
        self.tables.contains_key(&setting)
    }

    pub fn len(&self) -> usize {
        self.tables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tables.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Setting, &JointDistribution)> {
        self.tables.iter().map(|(setting, table)| (*setting, table))
    }

    /// Table for a rotation-symmetric source measured at two separations:
    /// `wide` fills the three correlation settings and `aligned` the four
    /// settings where `a' = b' = r`.
    pub fn symmetric_reduced(wide: JointDistribution, aligned: JointDistribution) -> Self {
        let mut table = Self::new();
        for setting in [Setting::AB, Setting::ABPrime, Setting::APrimeB] {
            table.insert(setting, wide);
        }
        for setting in [
            Setting::APrimeBPrime,
            Setting::APrimeR,
            Setting::RBPrime,
            Setting::RR,
        ] {
            table.insert(setting, aligned);
        }
        table
    }
}

impl FromIterator<(Setting, JointDistribution)> for SettingsTable {
    fn from_iter<I: IntoIterator<Item = (Setting, JointDistribution)>>(iter: I) -> Self {
        Self {
            tables: iter.into_iter().collect(),
        }
    }
}
