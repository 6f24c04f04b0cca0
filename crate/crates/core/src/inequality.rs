//! Inequality functionals, their reports, and the algebraic theorem behind
//! the two-channel bound.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Outcome, Setting, SettingsTable};
use crate::qm::Source;

/// One displayed inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InequalityId {
    /// Raw-probability two-channel inequality.
    Ineq17,
    /// The same inequality written with correlation functions.
    Ineq19,
    /// Ratio form that needs no emission count.
    Strong41,
    /// Ratio form reduced by rotation symmetry with `a' = b' = r`.
    Strong46,
    Chsh27,
    Bell65_28,
    Ch47,
    Fc48,
}

impl InequalityId {
    pub const ALL: [InequalityId; 8] = [
        InequalityId::Ineq17,
        InequalityId::Ineq19,
        InequalityId::Strong41,
        InequalityId::Strong46,
        InequalityId::Chsh27,
        InequalityId::Bell65_28,
        InequalityId::Ch47,
        InequalityId::Fc48,
    ];

    /// Functionals computed from a [`SettingsTable`].
    pub const TABULAR: [InequalityId; 6] = [
        InequalityId::Ineq17,
        InequalityId::Ineq19,
        InequalityId::Strong41,
        InequalityId::Strong46,
        InequalityId::Chsh27,
        InequalityId::Bell65_28,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            InequalityId::Ineq17 => "INEQ17",
            InequalityId::Ineq19 => "INEQ19",
            InequalityId::Strong41 => "STRONG41",
            InequalityId::Strong46 => "STRONG46",
            InequalityId::Chsh27 => "CHSH27",
            InequalityId::Bell65_28 => "BELL65_28",
            InequalityId::Ch47 => "CH47",
            InequalityId::Fc48 => "FC48",
        }
    }

    pub const fn bound(self) -> f64 {
        match self {
            InequalityId::Ineq17
            | InequalityId::Ineq19
            | InequalityId::Strong41
            | InequalityId::Strong46
            | InequalityId::Bell65_28 => -1.0,
            InequalityId::Chsh27 => -2.0,
            InequalityId::Ch47 => 0.0,
            InequalityId::Fc48 => 0.25,
        }
    }

    pub const fn direction(self) -> Direction {
        match self {
            InequalityId::Ch47 | InequalityId::Fc48 => Direction::AtMost,
            _ => Direction::AtLeast,
        }
    }

    pub const fn is_tabular(self) -> bool {
        !matches!(self, InequalityId::Ch47 | InequalityId::Fc48)
    }

    /// Settings a table must hold for this functional.
    pub const fn required_settings(self) -> &'static [Setting] {
        match self {
            InequalityId::Ineq17
            | InequalityId::Ineq19
            | InequalityId::Chsh27 => &[
                Setting::AB,
                Setting::ABPrime,
                Setting::APrimeB,
                Setting::APrimeBPrime,
            ],
            InequalityId::Bell65_28 => &[Setting::AB, Setting::ABPrime, Setting::APrimeB],
            InequalityId::Strong41 => &Setting::ALL,
            InequalityId::Strong46 => &[
                Setting::AB,
                Setting::ABPrime,
                Setting::APrimeB,
                Setting::RR,
            ],
            InequalityId::Ch47 | InequalityId::Fc48 => &[],
        }
    }

    /// Linear numerator and, for ratio forms, denominator over table entries.
    pub fn functional(self) -> Result<Functional> {
        let correlations = |form: &mut LinearForm| {
            for setting in [Setting::AB, Setting::ABPrime, Setting::APrimeB] {
                form.add(setting, coefficients::correlation(1.0));
            }
        };
        let mut numerator = LinearForm::default();
        let mut denominator = None;
        match self {
            InequalityId::Ineq17 | InequalityId::Ineq19 => {
                correlations(&mut numerator);
                numerator.add(Setting::APrimeBPrime, coefficients::same_channel(-2.0));
                numerator.add(Setting::APrimeBPrime, coefficients::singles());
            }
            InequalityId::Strong41 => {
                correlations(&mut numerator);
                numerator.add(Setting::APrimeBPrime, coefficients::same_channel(-2.0));
                numerator.add(Setting::APrimeR, coefficients::detected(1.0));
                numerator.add(Setting::RBPrime, coefficients::detected(1.0));
                denominator = Some(LinearForm::single(Setting::RR, coefficients::detected(1.0)));
            }
            InequalityId::Strong46 => {
                correlations(&mut numerator);
                numerator.add(Setting::RR, coefficients::opposite_channel(2.0));
                denominator = Some(LinearForm::single(Setting::RR, coefficients::detected(1.0)));
            }
            InequalityId::Chsh27 => {
                correlations(&mut numerator);
                numerator.add(Setting::APrimeBPrime, coefficients::correlation(-1.0));
            }
            InequalityId::Bell65_28 => correlations(&mut numerator),
            InequalityId::Ch47 | InequalityId::Fc48 => {
                return Err(Error::UnsupportedFunctional(
                    self,
                    "needs polarizer-removed rates, not a settings table",
                ))
            }
        }
        Ok(Functional {
            numerator,
            denominator,
        })
    }
}

impl fmt::Display for InequalityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let id = match s.trim().to_ascii_lowercase().as_str() {
            "ineq17" => InequalityId::Ineq17,
            "ineq19" => InequalityId::Ineq19,
            "strong41" => InequalityId::Strong41,
            "strong46" => InequalityId::Strong46,
            "chsh27" | "chsh" => InequalityId::Chsh27,
            "bell65_28" | "bell65" => InequalityId::Bell65_28,
            "ch47" | "ch" => InequalityId::Ch47,
            "fc48" | "fc" => InequalityId::Fc48,
            _ => return Err(Error::UnknownFunctional(s.to_string())),
        };
        Ok(id)
    }
}

impl Serialize for InequalityId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Local theories keep the value at or above the bound.
    AtLeast,
    /// Local theories keep the value at or below the bound.
    AtMost,
}

impl Direction {
    pub const fn symbol(self) -> &'static str {
        match self {
            Direction::AtLeast => ">=",
            Direction::AtMost => "<=",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

/// Value of a functional against its local bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub id: InequalityId,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
    pub violated: bool,
    /// Distance past the bound; positive means violated.
    pub margin: f64,
    pub std_error: Option<f64>,
}

impl InequalityReport {
    pub fn new(id: InequalityId, value: f64) -> Self {
        let bound = id.bound();
        let direction = id.direction();
        let margin = match direction {
            Direction::AtLeast => bound - value,
            Direction::AtMost => value - bound,
        };
        Self {
            id,
            value,
            bound,
            direction,
            // equality sits on the local side: the inequalities are non-strict
            violated: margin > 0.0,
            margin,
            std_error: None,
        }
    }

    pub fn with_std_error(mut self, std_error: f64) -> Self {
        self.std_error = Some(std_error);
        self
    }

    /// Margin in units of the bound's magnitude, when the bound is nonzero.
    pub fn relative_margin(&self) -> Option<f64> {
        (self.bound != 0.0).then(|| self.margin / self.bound.abs())
    }
}

/// 3x3 coefficient grids indexed like [`crate::model::JointDistribution`].
pub mod coefficients {
    use crate::model::Outcome;

    pub type Grid = [[f64; 3]; 3];

    fn build(f: impl Fn(Outcome, Outcome) -> f64) -> Grid {
        let mut grid = [[0.0; 3]; 3];
        for o1 in Outcome::ALL {
            for o2 in Outcome::ALL {
                grid[o1.index()][o2.index()] = f(o1, o2);
            }
        }
        grid
    }

    /// `scale * E` for one setting.
    pub fn correlation(scale: f64) -> Grid {
        build(|o1, o2| scale * o1.sign() * o2.sign())
    }

    /// `scale * (p++ + p--)`.
    pub fn same_channel(scale: f64) -> Grid {
        build(|o1, o2| if o1.is_detected() && o1 == o2 { scale } else { 0.0 })
    }

    /// `scale * (p+- + p-+)`.
    pub fn opposite_channel(scale: f64) -> Grid {
        build(|o1, o2| {
            if o1.is_detected() && o2.is_detected() && o1 != o2 {
                scale
            } else {
                0.0
            }
        })
    }

    /// `scale * (p++ + p+- + p-+ + p--)`.
    pub fn detected(scale: f64) -> Grid {
        build(|o1, o2| if o1.is_detected() && o2.is_detected() { scale } else { 0.0 })
    }

    /// Both sides' singles `p+ + p-`, read off as marginals.
    pub fn singles() -> Grid {
        build(|o1, o2| f64::from(u8::from(o1.is_detected()) + u8::from(o2.is_detected())))
    }
}

/// Weighted sum of table entries across settings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearForm {
    terms: Vec<(Setting, coefficients::Grid)>,
}

impl LinearForm {
    pub fn single(setting: Setting, grid: coefficients::Grid) -> Self {
        let mut form = Self::default();
        form.add(setting, grid);
        form
    }

    /// Add coefficients, merging with any existing grid for the setting.
    pub fn add(&mut self, setting: Setting, grid: coefficients::Grid) {
        if let Some((_, existing)) = self.terms.iter_mut().find(|(s, _)| *s == setting) {
            for (row, add_row) in existing.iter_mut().zip(grid.iter()) {
                for (value, add) in row.iter_mut().zip(add_row.iter()) {
                    *value += add;
                }
            }
        } else {
            self.terms.push((setting, grid));
        }
    }

    pub fn terms(&self) -> &[(Setting, coefficients::Grid)] {
        &self.terms
    }

    /// Substitute one setting's coefficients onto another (merging).
    pub fn redirect(&self, from: Setting, to: Setting) -> Self {
        let mut form = Self::default();
        for &(setting, grid) in &self.terms {
            form.add(if setting == from { to } else { setting }, grid);
        }
        form
    }

    pub fn evaluate(&self, table: &SettingsTable) -> Result<f64> {
        let mut total = 0.0;
        for (setting, grid) in &self.terms {
            let entries = table.get(*setting)?.entries();
            for (coeffs, row) in grid.iter().zip(entries.iter()) {
                for (c, p) in coeffs.iter().zip(row.iter()) {
                    total += c * p;
                }
            }
        }
        Ok(total)
    }
}

/// Numerator and optional denominator of a functional.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub numerator: LinearForm,
    pub denominator: Option<LinearForm>,
}

impl Functional {
    pub fn evaluate(&self, table: &SettingsTable) -> Result<f64> {
        let numerator = self.numerator.evaluate(table)?;
        match &self.denominator {
            None => Ok(numerator),
            Some(denominator) => {
                let k = denominator.evaluate(table)?;
                if k <= 0.0 {
                    return Err(Error::NoRrCoincidences);
                }
                Ok(numerator / k)
            }
        }
    }
}

fn e(table: &SettingsTable, setting: Setting) -> Result<f64> {
    Ok(table.get(setting)?.expectation())
}

fn three_correlations(t: &SettingsTable) -> Result<f64> {
    Ok(e(t, Setting::AB)? + e(t, Setting::ABPrime)? + e(t, Setting::APrimeB)?)
}

/// Correlation form with singles of `a'` and `b'`.
pub fn eval_ineq19(t: &SettingsTable) -> Result<InequalityReport> {
    let primed = t.get(Setting::APrimeBPrime)?;
    let singles = primed.first_single(Outcome::Plus)
        + primed.first_single(Outcome::Minus)
        + primed.second_single(Outcome::Plus)
        + primed.second_single(Outcome::Minus);
    let value = three_correlations(t)?
        - 2.0 * primed.get(Outcome::Plus, Outcome::Plus)
        - 2.0 * primed.get(Outcome::Minus, Outcome::Minus)
        + singles;
    Ok(InequalityReport::new(InequalityId::Ineq19, value))
}

/// Raw-probability form; algebraically identical to [`eval_ineq19`].
pub fn eval_ineq17(t: &SettingsTable) -> Result<InequalityReport> {
    let value = InequalityId::Ineq17.functional()?.evaluate(t)?;
    Ok(InequalityReport::new(InequalityId::Ineq17, value))
}

pub fn eval_chsh(t: &SettingsTable) -> Result<InequalityReport> {
    let value = three_correlations(t)? - e(t, Setting::APrimeBPrime)?;
    Ok(InequalityReport::new(InequalityId::Chsh27, value))
}

pub fn eval_bell65(t: &SettingsTable) -> Result<InequalityReport> {
    Ok(InequalityReport::new(
        InequalityId::Bell65_28,
        three_correlations(t)?,
    ))
}

/// Which ratio form to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrongForm {
    /// Full form over seven settings.
    General,
    /// Symmetric reduction: three correlations and the `r:r` table.
    Reduced,
}

pub fn eval_strong(t: &SettingsTable, form: StrongForm) -> Result<InequalityReport> {
    let id = match form {
        StrongForm::General => InequalityId::Strong41,
        StrongForm::Reduced => InequalityId::Strong46,
    };
    let value = id.functional()?.evaluate(t)?;
    Ok(InequalityReport::new(id, value))
}

/// `[3p(phi) - p(3phi) - p(a',inf) - p(inf,b)] / p(inf,inf) <= 0`.
pub fn eval_ch(source: &Source, phi_setting_deg: f64) -> Result<InequalityReport> {
    if !phi_setting_deg.is_finite() {
        return Err(Error::NonFiniteAngle(phi_setting_deg));
    }
    let p = |delta: f64| -> Result<f64> {
        Ok(source.joint(delta)?.get(Outcome::Plus, Outcome::Plus))
    };
    let value = (3.0 * p(phi_setting_deg)? - p(3.0 * phi_setting_deg)?
        - 2.0 * source.coincidence_one_removed())
        / source.coincidence_both_removed();
    Ok(InequalityReport::new(InequalityId::Ch47, value))
}

/// `[p(22.5) - p(67.5)] / p(inf,inf) <= 1/4`.
pub fn eval_fc(source: &Source) -> Result<InequalityReport> {
    let p = |delta: f64| -> Result<f64> {
        Ok(source.joint(delta)?.get(Outcome::Plus, Outcome::Plus))
    };
    let value = (p(22.5)? - p(67.5)?) / source.coincidence_both_removed();
    Ok(InequalityReport::new(InequalityId::Fc48, value))
}

/// Evaluate any table functional.
pub fn evaluate(id: InequalityId, t: &SettingsTable) -> Result<InequalityReport> {
    match id {
        InequalityId::Ineq17 => eval_ineq17(t),
        InequalityId::Ineq19 => eval_ineq19(t),
        InequalityId::Strong41 => eval_strong(t, StrongForm::General),
        InequalityId::Strong46 => eval_strong(t, StrongForm::Reduced),
        InequalityId::Chsh27 => eval_chsh(t),
        InequalityId::Bell65_28 => eval_bell65(t),
        InequalityId::Ch47 | InequalityId::Fc48 => Err(Error::UnsupportedFunctional(
            id,
            "needs polarizer-removed rates, not a settings table",
        )),
    }
}

/// Ten non-negative reals with every `x <= U` and every `y <= V`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoremPoint {
    pub x1p: f64,
    pub x1m: f64,
    pub x2p: f64,
    pub x2m: f64,
    pub y1p: f64,
    pub y1m: f64,
    pub y2p: f64,
    pub y2m: f64,
    pub u: f64,
    pub v: f64,
}

impl TheoremPoint {
    /// `xs = [x1+, x1-, x2+, x2-]`, `ys = [y1+, y1-, y2+, y2-]`.
    pub fn new(xs: [f64; 4], ys: [f64; 4], u: f64, v: f64) -> Result<Self> {
        check_caps(u, v)?;
        let out_of_box = |value: f64, cap: f64| !(0.0..=cap).contains(&value);
        if xs.iter().any(|&x| out_of_box(x, u)) || ys.iter().any(|&y| out_of_box(y, v)) {
            return Err(Error::InvalidTheoremPoint(format!(
                "x = {xs:?} must lie in [0, {u}] and y = {ys:?} in [0, {v}]"
            )));
        }
        Ok(Self::unchecked(xs, ys, u, v))
    }

    fn unchecked(xs: [f64; 4], ys: [f64; 4], u: f64, v: f64) -> Self {
        let [x1p, x1m, x2p, x2m] = xs;
        let [y1p, y1m, y2p, y2m] = ys;
        Self {
            x1p,
            x1m,
            x2p,
            x2m,
            y1p,
            y1m,
            y2p,
            y2m,
            u,
            v,
        }
    }
}

fn check_caps(u: f64, v: f64) -> Result<()> {
    if u >= 0.0 && v >= 0.0 && u.is_finite() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeCap { u, v })
    }
}

/// The nineteen-term expression, term by term in its printed order.
pub fn z_value(p: &TheoremPoint) -> f64 {
    let TheoremPoint {
        x1p,
        x1m,
        x2p,
        x2m,
        y1p,
        y1m,
        y2p,
        y2m,
        u,
        v,
    } = *p;
    x1p * y1p + x1m * y1m - x1p * y1m - x1m * y1p + y2p * x1p + y2m * x1m
        - y2p * x1m
        - y2m * x1p
        + y1p * x2p
        + y1m * x2m
        - y1p * x2m
        - y1m * x2p
        - 2.0 * x2p * y2p
        - 2.0 * x2m * y2m
        + v * x2p
        + v * x2m
        + u * y2p
        + u * y2m
        + u * v
}

/// Result of checking `Z >= 0` on a box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TheoremReport {
    pub u: f64,
    pub v: f64,
    pub min_vertex_value: f64,
    pub argmin: TheoremPoint,
    /// `None` when no interior samples were drawn.
    pub min_sampled_value: Option<f64>,
    pub samples: u64,
    pub holds: bool,
}

/// Enumerate all 256 box vertices (each variable at 0 or its cap) and draw
/// `samples` uniform interior points. Z is multilinear, so its minimum over
/// the box sits on a vertex; the samples are a cross-check.
pub fn verify_theorem(u: f64, v: f64, samples: u64, seed: u64) -> Result<TheoremReport> {
    check_caps(u, v)?;

    let mut min_vertex_value = f64::INFINITY;
    let mut argmin = TheoremPoint::unchecked([0.0; 4], [0.0; 4], u, v);
    for mask in 0u32..256 {
        let pick = |bit: u32, cap: f64| if mask & (1 << bit) != 0 { cap } else { 0.0 };
        let xs = [pick(0, u), pick(1, u), pick(2, u), pick(3, u)];
        let ys = [pick(4, v), pick(5, v), pick(6, v), pick(7, v)];
        let point = TheoremPoint::unchecked(xs, ys, u, v);
        let z = z_value(&point);
        if z < min_vertex_value {
            min_vertex_value = z;
            argmin = point;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_sampled: Option<f64> = None;
    for _ in 0..samples {
        let xs: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>() * u);
        let ys: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>() * v);
        let z = z_value(&TheoremPoint::unchecked(xs, ys, u, v));
        min_sampled = Some(min_sampled.map_or(z, |m| m.min(z)));
    }

    let floor = -1e-12 * (u * v).max(1.0);
    let holds = min_vertex_value >= floor && min_sampled.is_none_or(|m| m >= floor);
    Ok(TheoremReport {
        u,
        v,
        min_vertex_value,
        argmin,
        min_sampled_value: min_sampled,
        samples,
        holds,
    })
}
