//! Seeded Monte Carlo runs of a finite number of emitted pairs.
//!
//! Every pair draws one categorical sample over the nine outcome pairs of its
//! setting. The random stream is addressed by `(seed, setting, pair index)`:
//! the setting selects a ChaCha stream and the pair index a fixed word
//! offset inside it, so the tallies do not depend on how pairs are split
//! across worker threads.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequality::{self, InequalityId, InequalityReport, LinearForm};
use crate::model::{empirical_distribution, CountTable, JointDistribution, Setting, SettingsTable};

/// Pairs handled by one unit of parallel work.
const CHUNK_PAIRS: u64 = 1 << 16;
/// ChaCha words consumed per pair (one `u64`).
const WORDS_PER_PAIR: u128 = 2;

/// What to simulate: `N` pairs at each setting of an analytic table.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub pairs_per_setting: u64,
    pub seed: u64,
    pub settings: SettingsTable,
}

impl RunSpec {
    pub fn new(pairs_per_setting: u64, seed: u64, settings: SettingsTable) -> Result<Self> {
        if pairs_per_setting == 0 {
            return Err(Error::InvalidRun("pairs_per_setting must be at least 1".into()));
        }
        if settings.is_empty() {
            return Err(Error::InvalidRun("no settings to simulate".into()));
        }
        Ok(Self {
            pairs_per_setting,
            seed,
            settings,
        })
    }
}

/// Tallies and frequencies for one setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SettingRun {
    pub setting: Setting,
    pub counts: CountTable,
    pub empirical: JointDistribution,
    /// `sqrt(p(1 - p) / N)` per entry.
    pub std_errors: [[f64; 3]; 3],
}

/// Outcome of a run, or of a count table read back from disk.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunResult {
    pub settings: Vec<SettingRun>,
    /// Every table functional whose settings are present and whose
    /// denominator is nonzero, with first-order standard errors.
    pub reports: Vec<InequalityReport>,
}

impl RunResult {
    /// Build frequencies, errors and reports from per-setting counts.
    pub fn from_counts(counts: BTreeMap<Setting, CountTable>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::EmptyRun);
        }
        let mut settings = Vec::with_capacity(counts.len());
        for (setting, table) in counts {
            let empirical = empirical_distribution(&table)?;
            let n = table.total_pairs() as f64;
            let mut std_errors = [[0.0; 3]; 3];
            for (se_row, p_row) in std_errors.iter_mut().zip(empirical.entries()) {
                for (se, &p) in se_row.iter_mut().zip(p_row) {
                    *se = (p * (1.0 - p) / n).sqrt();
                }
            }
            settings.push(SettingRun {
                setting,
                counts: table,
                empirical,
                std_errors,
            });
        }

        let mut result = Self {
            settings,
            reports: Vec::new(),
        };
        let table = result.empirical_table();
        for id in InequalityId::TABULAR {
            if !id.required_settings().iter().all(|&s| table.contains(s)) {
                continue;
            }
            let report = match inequality::evaluate(id, &table) {
                Ok(report) => report,
                Err(Error::NoRrCoincidences) => continue,
                Err(err) => return Err(err),
            };
            let se = result.functional_std_error(id.functional()?, report.value)?;
            result.reports.push(report.with_std_error(se));
        }
        Ok(result)
    }

    pub fn empirical_table(&self) -> SettingsTable {
        self.settings
            .iter()
            .map(|run| (run.setting, run.empirical))
            .collect()
    }

    pub fn counts(&self) -> BTreeMap<Setting, CountTable> {
        self.settings.iter().map(|run| (run.setting, run.counts)).collect()
    }

    pub fn setting(&self, setting: Setting) -> Result<&SettingRun> {
        self.settings
            .iter()
            .find(|run| run.setting == setting)
            .ok_or(Error::MissingSetting(setting))
    }

    pub fn report(&self, id: InequalityId) -> Option<&InequalityReport> {
        self.reports.iter().find(|report| report.id == id)
    }

    /// Delta-method error of `numerator / denominator` at the given value.
    fn functional_std_error(&self, functional: inequality::Functional, value: f64) -> Result<f64> {
        match functional.denominator {
            None => self.form_variance(&functional.numerator).map(f64::sqrt),
            Some(denominator) => {
                let k = denominator.evaluate(&self.empirical_table())?;
                let linearized = combine(&functional.numerator, &denominator, -value);
                Ok(self.form_variance(&linearized)?.sqrt() / k)
            }
        }
    }

    /// Multinomial variance of a linear form over independent settings.
    fn form_variance(&self, form: &LinearForm) -> Result<f64> {
        let mut variance = 0.0;
        for (setting, grid) in form.terms() {
            let run = self.setting(*setting)?;
            let (mut mean, mut second) = (0.0, 0.0);
            for (coeffs, row) in grid.iter().zip(run.empirical.entries()) {
                for (c, p) in coeffs.iter().zip(row) {
                    mean += c * p;
                    second += c * c * p;
                }
            }
            variance += (second - mean * mean).max(0.0) / run.counts.total_pairs() as f64;
        }
        Ok(variance)
    }
}

/// `left + scale * right`.
fn combine(left: &LinearForm, right: &LinearForm, scale: f64) -> LinearForm {
    let mut form = left.clone();
    for (setting, grid) in right.terms() {
        let mut scaled = *grid;
        scaled.iter_mut().flatten().for_each(|c| *c *= scale);
        form.add(*setting, scaled);
    }
    form
}

/// Run on the global thread pool.
pub fn simulate(spec: &RunSpec) -> Result<RunResult> {
    let counts = spec
        .settings
        .iter()
        .map(|(setting, dist)| Ok((setting, sample_counts(spec, setting, dist)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    RunResult::from_counts(counts)
}

/// Run on a dedicated pool of `threads` workers. The result is identical
/// for every thread count.
pub fn simulate_with_threads(spec: &RunSpec, threads: usize) -> Result<RunResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|err| Error::InvalidRun(format!("cannot start worker pool: {err}")))?;
    pool.install(|| simulate(spec))
}

fn stream_id(setting: Setting) -> u64 {
    Setting::ALL
        .iter()
        .position(|&s| s == setting)
        .expect("every setting is listed") as u64
}

fn sample_counts(spec: &RunSpec, setting: Setting, dist: &JointDistribution) -> Result<CountTable> {
    let mut cumulative = [0.0; 9];
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (k, &p) in dist.entries().iter().flatten().enumerate() {
        acc += p;
        cumulative[k] = acc;
        if p > 0.0 {
            last_nonzero = k;
        }
    }

    let n = spec.pairs_per_setting;
    let chunks = n.div_ceil(CHUNK_PAIRS);
    let stream = stream_id(setting);
    let flat = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_PAIRS;
            let end = (start + CHUNK_PAIRS).min(n);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(stream);
            rng.set_word_pos(u128::from(start) * WORDS_PER_PAIR);
            let mut tally = [0u64; 9];
            for _ in start..end {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                let k = cumulative
                    .iter()
                    .position(|&c| u < c)
                    .unwrap_or(last_nonzero);
                tally[k] += 1;
            }
            tally
        })
        .reduce(
            || [0u64; 9],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut table = [[0u64; 3]; 3];
    for (k, count) in flat.into_iter().enumerate() {
        table[k / 3][k % 3] = count;
    }
    CountTable::with_total(table, n)
}

/// Reduced strong ratio straight from counts, where `N` cancels.
///
/// Settings `a:b'` and `a':b` fall back to `a:b` when absent, which is the
/// two-measurement scheme of a rotation-symmetric source. All settings used
/// must share the same pair count.
pub fn estimate_strong46(result: &RunResult) -> Result<InequalityReport> {
    let counts = result.counts();
    let mut numerator = InequalityId::Strong46.functional()?.numerator;
    for setting in [Setting::ABPrime, Setting::APrimeB] {
        if !counts.contains_key(&setting) {
            numerator = numerator.redirect(setting, Setting::AB);
        }
    }
    let denominator = InequalityId::Strong46
        .functional()?
        .denominator
        .expect("ratio form has a denominator");

    let weighted = |form: &LinearForm| -> Result<(f64, u64)> {
        let mut total = 0.0;
        let mut pairs = None;
        for (setting, grid) in form.terms() {
            let table = counts.get(setting).ok_or(Error::MissingSetting(*setting))?;
            match pairs {
                None => pairs = Some(table.total_pairs()),
                Some(n) if n != table.total_pairs() => {
                    return Err(Error::InvalidCounts(format!(
                        "setting {setting} has {} pairs, expected {n}",
                        table.total_pairs()
                    )))
                }
                Some(_) => {}
            }
            for (coeffs, row) in grid.iter().zip(table.entries()) {
                for (c, &count) in coeffs.iter().zip(row) {
                    total += c * count as f64;
                }
            }
        }
        Ok((total, pairs.unwrap_or(0)))
    };
    let (num, n_num) = weighted(&numerator)?;
    let (k, n_den) = weighted(&denominator)?;
    if n_num != n_den {
        return Err(Error::InvalidCounts(format!(
            "r:r has {n_den} pairs, correlation settings have {n_num}"
        )));
    }
    if k <= 0.0 {
        return Err(Error::NoRrCoincidences);
    }
    let value = num / k;
    let linearized = combine(&numerator, &denominator, -value);
    let k_prob = k / n_den as f64;
    let se = result.form_variance(&linearized)?.sqrt() / k_prob;
    Ok(InequalityReport::new(InequalityId::Strong46, value).with_std_error(se))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AngleConfig, Outcome};
    use crate::qm::{ExperimentParams, Source};

    fn point(first: Outcome, second: Outcome) -> JointDistribution {
        let mut p = [[0.0; 3]; 3];
        p[first.index()][second.index()] = 1.0;
        JointDistribution::new(p).unwrap()
    }

    fn optimal() -> AngleConfig {
        AngleConfig::from_cli_order([0.0, 60.0, 120.0, 120.0, 120.0]).unwrap()
    }

    #[test]
    fn single_pair_of_a_point_mass() {
        let settings = SettingsTable::new().with(Setting::AB, point(Outcome::Plus, Outcome::Plus));
        let result = simulate(&RunSpec::new(1, 3, settings).unwrap()).unwrap();
        assert_eq!(result.settings[0].counts.get(Outcome::Plus, Outcome::Plus), 1);
    }

    #[test]
    fn rejects_empty_specs() {
        let settings = SettingsTable::new().with(Setting::AB, point(Outcome::Plus, Outcome::Plus));
        assert!(RunSpec::new(0, 1, settings).is_err());
        assert!(RunSpec::new(5, 1, SettingsTable::new()).is_err());
    }

    #[test]
    fn counts_sum_to_n_and_repeat() {
        let table = Source::Ideal.settings_table(&optimal(), &Setting::ALL).unwrap();
        let spec = RunSpec::new(200_003, 11, table).unwrap();
        let first = simulate(&spec).unwrap();
        for run in &first.settings {
            assert_eq!(run.counts.entries().iter().flatten().sum::<u64>(), 200_003);
        }
        assert_eq!(first, simulate_with_threads(&spec, 1).unwrap());
        assert_eq!(first, simulate_with_threads(&spec, 3).unwrap());
    }

    #[test]
    fn seeds_and_settings_use_distinct_streams() {
        let uniform = JointDistribution::new([[1.0 / 9.0; 3]; 3]).unwrap();
        let table = SettingsTable::new().with(Setting::AB, uniform).with(Setting::RR, uniform);
        let run = simulate(&RunSpec::new(1000, 5, table.clone()).unwrap()).unwrap();
        assert_ne!(run.settings[0].counts, run.settings[1].counts);
        let other = simulate(&RunSpec::new(1000, 6, table).unwrap()).unwrap();
        assert_ne!(run.settings[0].counts, other.settings[0].counts);
    }

    #[test]
    fn ineq19_within_five_sigma() {
        let table = Source::Ideal.settings_table(&optimal(), &Setting::ALL).unwrap();
        let result = simulate(&RunSpec::new(100_000, 2024, table).unwrap()).unwrap();
        let report = result.report(InequalityId::Ineq19).unwrap();
        let se = report.std_error.unwrap();
        assert!(se > 0.0 && se < 0.02, "se = {se}");
        assert!((report.value + 1.5).abs() < 5.0 * se);
    }

    #[test]
    fn strong46_counts_cancel_n() {
        let params = ExperimentParams::new(0.9, 30.0).unwrap();
        let source = Source::Real(params);
        let table = source.settings_table(&optimal(), &Setting::ALL).unwrap();
        let result = simulate(&RunSpec::new(400_000, 8, table).unwrap()).unwrap();
        let estimate = estimate_strong46(&result).unwrap();

        let scaled = RunResult::from_counts(
            result
                .counts()
                .into_iter()
                .map(|(s, c)| (s, c.scaled(10)))
                .collect(),
        )
        .unwrap();
        assert_eq!(estimate_strong46(&scaled).unwrap().value, estimate.value);
        let from_table = result.report(InequalityId::Strong46).unwrap();
        assert!((from_table.value - estimate.value).abs() < 1e-12);
    }

    #[test]
    fn strong46_falls_back_to_a_single_wide_setting() {
        let source = Source::Real(ExperimentParams::new(0.9, 30.0).unwrap());
        let table = source.settings_table(&optimal(), &[Setting::AB, Setting::RR]).unwrap();
        let result = simulate(&RunSpec::new(1_000_000, 4, table).unwrap()).unwrap();
        let estimate = estimate_strong46(&result).unwrap();
        let target = 1.0 - 2.5 * source.depolarization();
        assert!((estimate.value - target).abs() < 5.0 * estimate.std_error.unwrap());
    }

    #[test]
    fn zero_rr_coincidences_fail() {
        let none = point(Outcome::Undetected, Outcome::Undetected);
        let table = SettingsTable::new().with(Setting::AB, point(Outcome::Plus, Outcome::Minus)).with(Setting::RR, none);
        let result = simulate(&RunSpec::new(10, 1, table).unwrap()).unwrap();
        assert_eq!(estimate_strong46(&result), Err(Error::NoRrCoincidences));
        assert!(result.report(InequalityId::Strong46).is_none());
    }

    #[test]
    fn error_shrinks_like_inverse_root_n() {
        let dist = Source::Ideal.joint(30.0).unwrap();
        let table = SettingsTable::new().with(Setting::AB, dist);
        let max_error = |n: u64| {
            let run = simulate(&RunSpec::new(n, 99, table.clone()).unwrap()).unwrap();
            let empirical = run.settings[0].empirical;
            let mut worst: f64 = 0.0;
            for o1 in Outcome::ALL {
                for o2 in Outcome::ALL {
                    worst = worst.max((empirical.get(o1, o2) - dist.get(o1, o2)).abs());
                }
            }
            worst * (n as f64).sqrt()
        };
        let scaled: Vec<f64> = [1_000, 10_000, 100_000, 1_000_000].map(max_error).to_vec();
        let (lo, hi) = scaled.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(hi / lo < 3.0, "{scaled:?}");
    }
}
