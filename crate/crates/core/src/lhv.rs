//! Local hidden-variable models.
//!
//! A hidden state is represented by the response function it induces: for
//! each side and each local orientation, the probabilities `(q+, q-)` of a
//! count in the ordinary and extraordinary channel. Locality is structural:
//! the second side's responses have no slot for the first side's orientation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequality::{InequalityId, InequalityReport};
use crate::model::{Axis, JointDistribution, Outcome, Setting, SettingsTable};

const RESPONSE_TOLERANCE: f64 = 1e-12;

/// Conditional detection probabilities at one orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Response {
    plus: f64,
    minus: f64,
}

impl Response {
    pub fn new(plus: f64, minus: f64) -> Result<Self> {
        let in_unit = |q: f64| (0.0..=1.0).contains(&q);
        if !in_unit(plus) || !in_unit(minus) || plus + minus > 1.0 + RESPONSE_TOLERANCE {
            return Err(Error::InvalidResponse(format!(
                "(q+, q-) = ({plus}, {minus}) must lie in [0,1] with q+ + q- <= 1"
            )));
        }
        Ok(Self { plus, minus })
    }

    pub fn deterministic(outcome: Outcome) -> Self {
        match outcome {
            Outcome::Plus => Self { plus: 1.0, minus: 0.0 },
            Outcome::Minus => Self { plus: 0.0, minus: 1.0 },
            Outcome::Undetected => Self { plus: 0.0, minus: 0.0 },
        }
    }

    pub fn plus(&self) -> f64 {
        self.plus
    }

    pub fn minus(&self) -> f64 {
        self.minus
    }

    /// q+ + q-.
    pub fn detection(&self) -> f64 {
        self.plus + self.minus
    }

    pub fn probability(&self, outcome: Outcome) -> f64 {
        match outcome {
            Outcome::Plus => self.plus,
            Outcome::Minus => self.minus,
            Outcome::Undetected => (1.0 - self.plus - self.minus).max(0.0),
        }
    }
}

/// Which side of the apparatus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl Side {
    const fn slot(self, axis: Axis) -> Option<usize> {
        match (self, axis) {
            (Side::First, Axis::A) | (Side::Second, Axis::B) => Some(0),
            (Side::First, Axis::APrime) | (Side::Second, Axis::BPrime) => Some(1),
            (_, Axis::R) => Some(2),
            _ => None,
        }
    }
}

/// Responses of one side, indexed by its own orientations only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SideResponses {
    slots: [Option<Response>; 3],
}

impl SideResponses {
    /// Slots in the order (a or b, a' or b', r).
    pub fn new(slots: [Option<Response>; 3]) -> Self {
        Self { slots }
    }

    pub fn full(unprimed: Response, primed: Response, reference: Response) -> Self {
        Self::new([Some(unprimed), Some(primed), Some(reference)])
    }

    pub fn slots(&self) -> &[Option<Response>; 3] {
        &self.slots
    }
}

/// The response function of one hidden state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResponseFunction {
    pub first: SideResponses,
    pub second: SideResponses,
}

impl ResponseFunction {
    pub fn new(first: SideResponses, second: SideResponses) -> Self {
        Self { first, second }
    }

    fn side(&self, side: Side) -> &SideResponses {
        match side {
            Side::First => &self.first,
            Side::Second => &self.second,
        }
    }

    pub fn response(&self, side: Side, axis: Axis) -> Result<Response> {
        side.slot(axis)
            .and_then(|slot| self.side(side).slots[slot])
            .ok_or(Error::MissingResponse(axis))
    }

    /// Copy each side's `r` response onto its primed orientation, the
    /// situation where `a'` and `b'` point along `r`.
    pub fn aligned_to_reference(mut self) -> Self {
        for side in [&mut self.first, &mut self.second] {
            side.slots[1] = side.slots[2];
        }
        self
    }

    fn reference_detection(&self, side: Side) -> Result<f64> {
        Ok(self.response(side, Axis::R)?.detection())
    }
}

/// Each channel probability at every orientation is at most the total
/// detection probability at `r` on the same side.
pub fn check_supplementary(rf: &ResponseFunction) -> Result<bool> {
    for side in [Side::First, Side::Second] {
        let cap = rf.reference_detection(side)? + RESPONSE_TOLERANCE;
        for response in rf.side(side).slots.iter().take(2).flatten() {
            if response.plus > cap || response.minus > cap {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Total detection probability is the same at every orientation of a side.
pub fn check_gr(rf: &ResponseFunction) -> Result<bool> {
    for side in [Side::First, Side::Second] {
        let reference = rf.reference_detection(side)?;
        for response in rf.side(side).slots.iter().take(2).flatten() {
            if (response.detection() - reference).abs() > RESPONSE_TOLERANCE {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A weighted mixture of response functions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LhvModel {
    strategies: Vec<ResponseFunction>,
    weights: Vec<f64>,
}

impl LhvModel {
    pub fn new(strategies: Vec<ResponseFunction>, weights: Vec<f64>) -> Result<Self> {
        if strategies.is_empty() || strategies.len() != weights.len() {
            return Err(Error::InvalidModel(format!(
                "{} strategies with {} weights",
                strategies.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) {
            return Err(Error::InvalidModel("negative weight".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("weights sum to {total}")));
        }
        Ok(Self {
            strategies,
            weights,
        })
    }

    pub fn single(strategy: ResponseFunction) -> Self {
        Self {
            strategies: vec![strategy],
            weights: vec![1.0],
        }
    }

    pub fn aligned_to_reference(self) -> Self {
        Self {
            strategies: self
                .strategies
                .into_iter()
                .map(ResponseFunction::aligned_to_reference)
                .collect(),
            weights: self.weights,
        }
    }

    pub fn strategies(&self) -> &[ResponseFunction] {
        &self.strategies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Ensemble tables: each joint entry is the weighted sum over hidden states
/// of the product of the two sides' conditional probabilities.
pub fn ensemble_table(model: &LhvModel, pairs: &[Setting]) -> Result<SettingsTable> {
    pairs
        .iter()
        .map(|&setting| {
            let (first_axis, second_axis) = setting.axes();
            let mut p = [[0.0; 3]; 3];
            for (rf, &w) in model.strategies.iter().zip(&model.weights) {
                let first = rf.response(Side::First, first_axis)?;
                let second = rf.response(Side::Second, second_axis)?;
                for o1 in Outcome::ALL {
                    for o2 in Outcome::ALL {
                        p[o1.index()][o2.index()] +=
                            w * first.probability(o1) * second.probability(o2);
                    }
                }
            }
            Ok((setting, JointDistribution::new(p)?))
        })
        .collect()
}

/// Response-function constraint beyond locality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    None,
    Supplementary,
    Gr,
}

impl std::str::FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Constraint::None),
            "supplementary" | "supp" => Ok(Constraint::Supplementary),
            "gr" => Ok(Constraint::Gr),
            other => Err(Error::InvalidModel(format!("unknown constraint `{other}`"))),
        }
    }
}

impl Constraint {
    pub fn admits(self, rf: &ResponseFunction) -> Result<bool> {
        match self {
            Constraint::None => Ok(true),
            Constraint::Supplementary => check_supplementary(rf),
            Constraint::Gr => check_gr(rf),
        }
    }
}

/// Outcome of every orientation on both sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DeterministicStrategy {
    /// (a, a', r) outcomes.
    pub first: [Outcome; 3],
    /// (b, b', r) outcomes.
    pub second: [Outcome; 3],
}

impl DeterministicStrategy {
    /// All 27 x 27 strategies in a fixed order.
    pub fn all() -> impl Iterator<Item = DeterministicStrategy> {
        let side = |index: usize| -> [Outcome; 3] {
            [
                Outcome::ALL[index / 9],
                Outcome::ALL[(index / 3) % 3],
                Outcome::ALL[index % 3],
            ]
        };
        (0..27 * 27).map(move |index| DeterministicStrategy {
            first: side(index / 27),
            second: side(index % 27),
        })
    }

    pub fn to_response(&self) -> ResponseFunction {
        let side = |outcomes: [Outcome; 3]| {
            SideResponses::new(outcomes.map(|o| Some(Response::deterministic(o))))
        };
        ResponseFunction::new(side(self.first), side(self.second))
    }

    pub fn outcome(&self, side: Side, axis: Axis) -> Option<Outcome> {
        let slot = side.slot(axis)?;
        Some(match side {
            Side::First => self.first[slot],
            Side::Second => self.second[slot],
        })
    }
}

/// Exact local bound and a strategy attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LocalBound {
    pub functional: InequalityId,
    pub constraint: Constraint,
    /// Extreme value of the functional over admissible local models.
    pub value: f64,
    pub witness: DeterministicStrategy,
    pub strategies_checked: usize,
}

/// Extreme value of a table functional over all deterministic local
/// strategies admitted by `constraint`.
///
/// Ensemble tables are multilinear in the response probabilities, so for
/// plain functionals the extreme value over mixtures is attained by a single
/// strategy. Ratio functionals are bounded through `numerator + bound *
/// denominator`: strategies with a zero denominator are skipped, unless one
/// of them has a numerator on the violating side, in which case mixing it
/// with a vanishing share of detecting strategies drives the ratio without
/// limit and the bound is reported as infinite. The bell65 form presupposes
/// perfect correlation along `a' = b'`, so only strategies with matching
/// detected outcomes there are admitted; the reduced strong form presupposes
/// `a' = b' = r`, so primed outcomes must equal the `r` outcomes.
pub fn local_bound(functional: InequalityId, constraint: Constraint) -> Result<LocalBound> {
    let form = functional.functional()?;
    let pairs = functional.required_settings();
    let maximize = matches!(functional.direction(), crate::inequality::Direction::AtMost);
    let worse = |value: f64, current: f64| if maximize { value > current } else { value < current };

    let mut best: Option<(f64, DeterministicStrategy)> = None;
    let mut unbounded: Option<DeterministicStrategy> = None;
    let mut checked = 0;
    for strategy in DeterministicStrategy::all() {
        if functional == InequalityId::Bell65_28 {
            let a_prime = strategy.first[1];
            if !a_prime.is_detected() || a_prime != strategy.second[1] {
                continue;
            }
        }
        if functional == InequalityId::Strong46
            && (strategy.first[1] != strategy.first[2] || strategy.second[1] != strategy.second[2])
        {
            continue;
        }
        let rf = strategy.to_response();
        if !constraint.admits(&rf)? {
            continue;
        }
        let table = ensemble_table(&LhvModel::single(rf), pairs)?;
        checked += 1;
        let numerator = form.numerator.evaluate(&table)?;
        let value = match &form.denominator {
            None => numerator,
            Some(denominator) => {
                let k = denominator.evaluate(&table)?;
                if k <= 0.0 {
                    if unbounded.is_none() && worse(numerator, 0.0) {
                        unbounded = Some(strategy);
                    }
                    continue;
                }
                numerator / k
            }
        };
        if best.is_none_or(|(current, _)| worse(value, current)) {
            best = Some((value, strategy));
        }
    }

    let (value, witness) = match (unbounded, best) {
        (Some(strategy), _) => {
            let infinite = if maximize { f64::INFINITY } else { f64::NEG_INFINITY };
            (infinite, strategy)
        }
        (None, Some(found)) => found,
        (None, None) => {
            return Err(Error::InvalidModel(format!(
                "no admissible strategy for {functional}"
            )))
        }
    };
    Ok(LocalBound {
        functional,
        constraint,
        value,
        witness,
        strategies_checked: checked,
    })
}

fn random_response<R: Rng>(rng: &mut R) -> Response {
    // uniform on the triangle q+ + q- <= 1
    let (mut plus, mut minus) = (rng.gen::<f64>(), rng.gen::<f64>());
    if plus + minus > 1.0 {
        plus = 1.0 - plus;
        minus = 1.0 - minus;
    }
    Response { plus, minus }
}

fn random_side<R: Rng>(rng: &mut R, constraint: Constraint) -> SideResponses {
    match constraint {
        Constraint::None => SideResponses::full(
            random_response(rng),
            random_response(rng),
            random_response(rng),
        ),
        Constraint::Supplementary => loop {
            let side = SideResponses::full(
                random_response(rng),
                random_response(rng),
                random_response(rng),
            );
            let cap = side.slots[2].map_or(0.0, |r| r.detection());
            if side.slots[..2]
                .iter()
                .flatten()
                .all(|r| r.plus <= cap && r.minus <= cap)
            {
                break side;
            }
        },
        Constraint::Gr => {
            // uniform over {common total t, split of t at each orientation}:
            // the region's cross-section grows like t^3
            let total = rng.gen::<f64>().powf(0.25);
            let mut split = || {
                let plus = total * rng.gen::<f64>();
                Response {
                    plus,
                    minus: (total - plus).max(0.0),
                }
            };
            SideResponses::full(split(), split(), split())
        }
    }
}

/// Draw one response function satisfying `constraint`.
pub fn sample_response<R: Rng>(rng: &mut R, constraint: Constraint) -> ResponseFunction {
    let first = random_side(rng, constraint);
    let second = random_side(rng, constraint);
    ResponseFunction::new(first, second)
}

/// Deterministic random mixture of `n_strategies` constrained responses.
pub fn sample_random_model(seed: u64, n_strategies: usize, constraint: Constraint) -> Result<LhvModel> {
    if n_strategies == 0 {
        return Err(Error::InvalidModel("need at least one strategy".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strategies = (0..n_strategies)
        .map(|_| sample_response(&mut rng, constraint))
        .collect();
    let raw: Vec<f64> = (0..n_strategies).map(|_| rng.gen::<f64>() + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    // put rounding residue on the last weight so the sum is exact to 1e-12
    let residue = 1.0 - weights.iter().sum::<f64>();
    if let Some(last) = weights.last_mut() {
        *last = (*last + residue).max(0.0);
    }
    LhvModel::new(strategies, weights)
}

/// Worst (most violating) value of a functional over random local models.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    pub functional: InequalityId,
    pub constraint: Constraint,
    pub models: usize,
    pub worst: InequalityReport,
    pub worst_model_seed: u64,
}

/// Evaluate `models` random models seeded `seed, seed+1, ...` and keep the
/// one with the largest violation margin. For the reduced strong form every
/// response function is aligned to `r` first.
pub fn sample_worst(
    functional: InequalityId,
    constraint: Constraint,
    models: usize,
    strategies_per_model: usize,
    seed: u64,
) -> Result<SampleSummary> {
    let pairs = functional.required_settings();
    let mut worst: Option<(InequalityReport, u64)> = None;
    for offset in 0..models as u64 {
        let model_seed = seed.wrapping_add(offset);
        let mut model = sample_random_model(model_seed, strategies_per_model, constraint)?;
        if functional == InequalityId::Strong46 {
            model = model.aligned_to_reference();
        }
        let table = ensemble_table(&model, pairs)?;
        let report = match crate::inequality::evaluate(functional, &table) {
            Ok(report) => report,
            Err(Error::NoRrCoincidences) => continue,
            Err(e) => return Err(e),
        };
        if worst.is_none_or(|(w, _)| report.margin > w.margin) {
            worst = Some((report, model_seed));
        }
    }
    let (worst, worst_model_seed) =
        worst.ok_or_else(|| Error::InvalidModel("no model produced a value".into()))?;
    Ok(SampleSummary {
        functional,
        constraint,
        models,
        worst,
        worst_model_seed,
    })
}
