//! Grid-then-refine search for the polarizer orientations that violate an
//! inequality the most.
//!
//! The objective is the report margin (positive means violated). A coarse
//! grid over the free orientations is scanned exhaustively, then a compass
//! search refines the best grid point with halving steps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequality::{self, InequalityId, InequalityReport};
use crate::model::{AngleConfig, Axis};
use crate::qm::Source;

/// Margins closer than this are treated as equal on the grid.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Grid points handled by one unit of parallel work.
const CHUNK_POINTS: usize = 4096;

/// Which inequality to violate, with which predictions, over which angles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationProblem {
    pub inequality: InequalityId,
    pub source: Source,
    /// Orientations searched, kept in command-line order.
    pub free: Vec<Axis>,
    /// Values of the fixed orientations.
    pub base: AngleConfig,
}

impl OptimizationProblem {
    pub fn new(
        inequality: InequalityId,
        source: Source,
        free: &[Axis],
        base: AngleConfig,
    ) -> Result<Self> {
        if !inequality.is_tabular() {
            return Err(Error::UnsupportedFunctional(
                inequality,
                "only table functionals depend on the orientations",
            ));
        }
        if free.is_empty() {
            return Err(Error::InvalidProblem("no free orientation".into()));
        }
        let tied = tied_axes(inequality);
        let mut ordered = Vec::new();
        for axis in Axis::CLI_ORDER {
            let count = free.iter().filter(|&&f| f == axis).count();
            if count > 1 {
                return Err(Error::InvalidProblem(format!("orientation {axis} listed twice")));
            }
            if count == 1 {
                if tied.contains(&axis) {
                    return Err(Error::InvalidProblem(format!(
                        "{axis} follows a' for {inequality} and cannot be free"
                    )));
                }
                ordered.push(axis);
            }
        }
        Ok(Self {
            inequality,
            source,
            free: ordered,
            base,
        })
    }

    /// Orientations the objective reads that are not tied to `a'`.
    fn independent_axes(&self) -> Vec<Axis> {
        let tied = tied_axes(self.inequality);
        Axis::CLI_ORDER
            .into_iter()
            .filter(|axis| !tied.contains(axis))
            .filter(|&axis| {
                self.inequality
                    .required_settings()
                    .iter()
                    .any(|s| s.axes().0 == axis || s.axes().1 == axis)
            })
            .collect()
    }

    /// Apply free values, then copy `a'` onto the tied orientations.
    pub fn config(&self, values: &[f64]) -> Result<AngleConfig> {
        let mut config = self.base;
        for (&axis, &value) in self.free.iter().zip(values) {
            config = config.with_angle(axis, value)?;
        }
        for axis in tied_axes(self.inequality) {
            config = config.with_angle(*axis, config.angle(Axis::APrime))?;
        }
        Ok(config)
    }

    pub fn evaluate(&self, config: &AngleConfig) -> Result<InequalityReport> {
        let table = self
            .source
            .settings_table(config, self.inequality.required_settings())?;
        inequality::evaluate(self.inequality, &table)
    }

    fn margin(&self, values: &[f64]) -> f64 {
        self.config(values)
            .and_then(|config| self.evaluate(&config))
            .map_or(f64::NEG_INFINITY, |report| report.margin)
    }
}

/// Orientations slaved to `a'`. The reduced strong form is derived for
/// `a' = b' = r`, and the three-correlation form assumes perfect correlation
/// along `a' = b'`; outside those ties neither bound applies.
pub fn tied_axes(inequality: InequalityId) -> &'static [Axis] {
    match inequality {
        InequalityId::Strong46 => &[Axis::BPrime, Axis::R],
        InequalityId::Bell65_28 => &[Axis::BPrime],
        _ => &[],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Coarse grid spacing in degrees; must divide 180.
    pub grid_step: f64,
    /// Refinement stops once the compass step drops below this.
    pub tolerance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_step: 5.0,
            tolerance: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub best_config: AngleConfig,
    /// `(a-b, b'-a, b-a', a'-b')` of the best configuration.
    pub differences: [f64; 4],
    pub report: InequalityReport,
    pub grid_config: AngleConfig,
    pub grid_margin: f64,
    pub evaluations: u64,
}

pub fn optimize(problem: &OptimizationProblem, options: SearchOptions) -> Result<OptimizationResult> {
    let SearchOptions {
        grid_step,
        tolerance,
    } = options;
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidProblem(format!("grid step {grid_step} must be positive")));
    }
    let cells = (180.0 / grid_step).round();
    if cells < 1.0 || (cells * grid_step - 180.0).abs() > 1e-9 {
        return Err(Error::InvalidProblem(format!("grid step {grid_step} does not divide 180")));
    }
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(Error::InvalidProblem(format!("tolerance {tolerance} must be positive")));
    }
    let cells = cells as usize;

    // with every orientation free only differences matter: fix the first
    let independent = problem.independent_axes();
    let pinned = independent.iter().all(|axis| problem.free.contains(axis));
    let searched = if pinned { 1 } else { 0 };
    let dims = problem.free.len() - searched;
    let points = cells
        .checked_pow(dims as u32)
        .filter(|&p| p <= 1 << 28)
        .ok_or_else(|| Error::InvalidProblem("grid too large".into()))?;

    let point = |index: usize| -> Vec<f64> {
        let mut values = vec![0.0; problem.free.len()];
        let mut rest = index;
        for slot in (searched..problem.free.len()).rev() {
            values[slot] = (rest % cells) as f64 * grid_step;
            rest /= cells;
        }
        values
    };

    let chunk_bests: Vec<(f64, usize)> = (0..points.div_ceil(CHUNK_POINTS))
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK_POINTS;
            let end = (start + CHUNK_POINTS).min(points);
            (start..end)
                .map(|index| (problem.margin(&point(index)), index))
                .fold((f64::NEG_INFINITY, usize::MAX), pick)
        })
        .collect();
    let (grid_margin, grid_index) = chunk_bests
        .into_iter()
        .fold((f64::NEG_INFINITY, usize::MAX), pick);
    let mut evaluations = points as u64;

    let mut values = point(grid_index);
    if grid_margin == f64::NEG_INFINITY {
        // nothing on the grid evaluates; surface the reason
        problem.evaluate(&problem.config(&values)?)?;
    }

    let mut margin = grid_margin;
    let mut step = grid_step / 2.0;
    while step >= tolerance {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for slot in searched..values.len() {
            for sign in [1.0, -1.0] {
                let mut trial = values.clone();
                trial[slot] = crate::model::fold_angle(trial[slot] + sign * step);
                let m = problem.margin(&trial);
                evaluations += 1;
                if m > best.as_ref().map_or(margin, |(b, _)| *b) {
                    best = Some((m, trial));
                }
            }
        }
        match best {
            Some((m, trial)) => {
                margin = m;
                values = trial;
            }
            None => step /= 2.0,
        }
    }

    let best_config = problem.config(&values)?;
    let report = problem.evaluate(&best_config)?;
    Ok(OptimizationResult {
        best_config,
        differences: best_config.canonical_differences(),
        report,
        grid_config: problem.config(&point(grid_index))?,
        grid_margin,
        evaluations,
    })
}

/// Larger margin wins; near-ties go to the lexicographically smaller point.
fn pick(best: (f64, usize), candidate: (f64, usize)) -> (f64, usize) {
    let (bm, bi) = best;
    let (cm, ci) = candidate;
    let better = if bm == f64::NEG_INFINITY || cm == f64::NEG_INFINITY {
        cm > bm || (cm == bm && ci < bi)
    } else if (cm - bm).abs() <= TIE_TOLERANCE {
        ci < bi
    } else {
        cm > bm
    };
    if better {
        candidate
    } else {
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qm::ExperimentParams;

    fn zero() -> AngleConfig {
        AngleConfig::new(0.0, 0.0, 0.0, 0.0, 0.0).unwrap()
    }

    fn close_angle(x: f64, target: f64, tol: f64) -> bool {
        let d = (x - target).rem_euclid(180.0);
        d.min(180.0 - d) <= tol
    }

    #[test]
    fn strong46_ideal_recovers_120_degrees() {
        let problem = OptimizationProblem::new(
            InequalityId::Strong46,
            Source::Ideal,
            &[Axis::A, Axis::B, Axis::APrime],
            zero(),
        )
        .unwrap();
        let result = optimize(&problem, SearchOptions::default()).unwrap();
        assert!((result.report.value + 1.5).abs() < 1e-6);
        for (d, target) in result.differences.iter().zip([120.0, 120.0, 120.0, 0.0]) {
            assert!(close_angle(*d, target, 0.05), "{:?}", result.differences);
        }
        assert!((result.report.margin - 0.5).abs() < 1e-6);
    }

    #[test]
    fn chsh_reaches_two_root_two() {
        let problem = OptimizationProblem::new(
            InequalityId::Chsh27,
            Source::Ideal,
            &[Axis::A, Axis::B, Axis::APrime, Axis::BPrime],
            zero(),
        )
        .unwrap();
        let result = optimize(&problem, SearchOptions::default()).unwrap();
        assert!((result.report.value + 2.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!(result.report.margin >= result.grid_margin);
    }

    #[test]
    fn bell65_reaches_minus_one_and_a_half() {
        let problem = OptimizationProblem::new(
            InequalityId::Bell65_28,
            Source::Ideal,
            &[Axis::A, Axis::B, Axis::APrime],
            zero(),
        )
        .unwrap();
        let result = optimize(&problem, SearchOptions::default()).unwrap();
        assert!((result.report.value + 1.5).abs() < 1e-9);
    }

    #[test]
    fn real_source_reaches_closed_form() {
        for f in [1.0, 0.98803, 0.9] {
            let params = ExperimentParams::new(0.9, 30.0).unwrap().with_f_override(f).unwrap();
            let problem = OptimizationProblem::new(
                InequalityId::Strong46,
                Source::Real(params),
                &[Axis::A, Axis::B, Axis::APrime],
                zero(),
            )
            .unwrap();
            let result = optimize(&problem, SearchOptions::default()).unwrap();
            assert!((result.report.value - (1.0 - 2.5 * f)).abs() < 1e-6, "F = {f}");
        }
    }

    #[test]
    fn unconstrained_general_form_goes_past_one_and_a_half() {
        // without a' = b' = r the general ratio reaches 1 - 2 sqrt(2) F
        let problem = OptimizationProblem::new(
            InequalityId::Strong41,
            Source::Ideal,
            &Axis::CLI_ORDER,
            zero(),
        )
        .unwrap();
        let options = SearchOptions {
            grid_step: 7.5,
            tolerance: 0.01,
        };
        let result = optimize(&problem, options).unwrap();
        assert!((result.report.value - (1.0 - 2.0 * 2f64.sqrt())).abs() < 1e-6);
    }

    #[test]
    fn common_offset_does_not_change_the_margin() {
        let options = SearchOptions {
            grid_step: 5.0,
            tolerance: 1e-6,
        };
        let best = |a: f64| {
            let base = AngleConfig::new(a, 0.0, 0.0, 0.0, 0.0).unwrap();
            let problem = OptimizationProblem::new(
                InequalityId::Strong46,
                Source::Ideal,
                &[Axis::B, Axis::APrime],
                base,
            )
            .unwrap();
            optimize(&problem, options).unwrap().report.margin
        };
        let reference = best(0.0);
        for offset in [37.0, 91.3, 179.0] {
            assert!((best(offset) - reference).abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_never_loses_ground() {
        let params = ExperimentParams::new(0.7, 45.0).unwrap();
        for id in [InequalityId::Ineq19, InequalityId::Chsh27, InequalityId::Strong41] {
            let problem = OptimizationProblem::new(
                id,
                Source::Real(params),
                &[Axis::B, Axis::APrime],
                AngleConfig::new(10.0, 0.0, 0.0, 20.0, 30.0).unwrap(),
            )
            .unwrap();
            let result = optimize(&problem, SearchOptions::default()).unwrap();
            assert!(result.report.margin >= result.grid_margin);
        }
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let all = [Axis::A];
        assert!(OptimizationProblem::new(InequalityId::Ch47, Source::Ideal, &all, zero()).is_err());
        assert!(OptimizationProblem::new(InequalityId::Chsh27, Source::Ideal, &[], zero()).is_err());
        assert!(OptimizationProblem::new(
            InequalityId::Strong46,
            Source::Ideal,
            &[Axis::R],
            zero()
        )
        .is_err());
        let problem = OptimizationProblem::new(InequalityId::Chsh27, Source::Ideal, &all, zero()).unwrap();
        for grid_step in [7.0, 0.0, -5.0] {
            let options = SearchOptions {
                grid_step,
                tolerance: 0.01,
            };
            assert!(optimize(&problem, options).is_err());
        }
    }

    #[test]
    fn thread_count_does_not_matter() {
        let problem = OptimizationProblem::new(
            InequalityId::Chsh27,
            Source::Ideal,
            &[Axis::A, Axis::B, Axis::APrime, Axis::BPrime],
            zero(),
        )
        .unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| optimize(&problem, SearchOptions::default()).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
