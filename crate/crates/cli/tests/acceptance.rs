//! Acceptance suite: one PASS/FAIL line per criterion, each with its pinned
//! tolerance and runtime limit. Runs the `bellbench` binary where the
//! criterion names a command and the library otherwise.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use bellbench::inequality::{eval_ch, eval_chsh, eval_fc, eval_ineq19, eval_strong, StrongForm};
use bellbench::inequality::{eval_bell65, InequalityId};
use bellbench::lhv::{
    check_gr, check_supplementary, ensemble_table, sample_response, Constraint,
    DeterministicStrategy, LhvModel, Response, ResponseFunction, SideResponses,
};
use bellbench::model::{AngleConfig, JointDistribution, Setting, SettingsTable};
use bellbench::{ExperimentParams, Source};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const IDEAL_VALUE_TOL: f64 = 1e-12;
const THEOREM_FLOOR: f64 = -1e-12;
const IDENTITY_TOL: f64 = 1e-12;
const STRONG_TOL: f64 = 1e-6;
const COMPARISON_TOL: f64 = 1e-5;
const RATIO_TOL: f64 = 1e-3;
const MC_SIGMAS: f64 = 5.0;
const ANGLE_TOL: f64 = 0.05;
const OPTIMUM_TOL: f64 = 1e-6;

/// a,b,a',b',r with differences (120, 120, 120, 0).
const OPTIMAL: &str = "0,60,120,120,120";

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn bellbench(args: &[&str]) -> Result<Vec<u8>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_bellbench"))
        .args(args)
        .env_remove("BELLBENCH_SEED")
        .output()
        .map_err(|e| e.to_string())?;
    if !output.status.success() {
        return Err(format!(
            "bellbench {} exited with {}: {}",
            args.join(" "),
            output.status,
            String::from_utf8_lossy(&output.stderr)
        ));
    }
    Ok(output.stdout)
}

fn bellbench_json(args: &[&str]) -> Result<Value, String> {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    serde_json::from_slice(&bellbench(&full)?).map_err(|e| e.to_string())
}

fn float(v: &Value) -> Result<f64, String> {
    v.as_f64().ok_or_else(|| format!("expected a number, got {v}"))
}

fn circular_distance(x: f64, target: f64) -> f64 {
    let d = (x - target).rem_euclid(180.0);
    d.min(180.0 - d)
}

fn ideal_maximal_violation() -> Result<Outcome, String> {
    let v = bellbench_json(&["predict", "--ideal", "--angles", OPTIMAL, "--ineq", "ineq19"])?;
    let diffs: Vec<f64> = v["differences"]
        .as_array()
        .ok_or("no differences")?
        .iter()
        .map(float)
        .collect::<Result<_, _>>()?;
    let value = float(&v["reports"][0]["value"])?;
    let err = (value + 1.5).abs();
    Ok(check(
        diffs == [120.0, 120.0, 120.0, 0.0] && err < IDEAL_VALUE_TOL && v["reports"][0]["violated"] == true,
        format!("differences {diffs:?}, INEQ19 = {value:.17} (|err| {err:.1e} < {IDEAL_VALUE_TOL:.0e})"),
    ))
}

fn theorem_tightness() -> Result<Outcome, String> {
    let v = bellbench_json(&[
        "verify-theorem", "--U", "1", "--V", "1", "--samples", "1000000", "--seed", "7",
    ])?;
    let vertex = float(&v["min_vertex_value"])?;
    let sampled = float(&v["min_sampled_value"])?;
    Ok(check(
        vertex == 0.0 && sampled >= THEOREM_FLOOR && v["samples"] == 1_000_000,
        format!("256 vertices min {vertex}, 10^6 samples min {sampled:.6} (floor {THEOREM_FLOOR:.0e})"),
    ))
}

fn lhv_bound() -> Result<Outcome, String> {
    let v = bellbench_json(&["lhv-bound", "ineq19", "none"])?;
    let value = float(&v["value"])?;
    let checked = v["strategies_checked"].as_u64().unwrap_or(0);

    // independent pass: no strategy goes below -1
    let pairs = InequalityId::Ineq19.required_settings();
    let mut below = 0;
    let mut attained = false;
    for strategy in DeterministicStrategy::all() {
        let table = ensemble_table(&LhvModel::single(strategy.to_response()), pairs)
            .map_err(|e| e.to_string())?;
        let x = eval_ineq19(&table).map_err(|e| e.to_string())?.value;
        below += usize::from(x < -1.0);
        attained |= x == -1.0;
    }
    Ok(check(
        value == -1.0 && checked == 729 && below == 0 && attained,
        format!("bound {value} over {checked} strategies, {below} below -1"),
    ))
}

fn detected_table<R: Rng>(rng: &mut R) -> JointDistribution {
    let w: [f64; 4] = std::array::from_fn(|_| rng.gen());
    let total: f64 = w.iter().sum();
    JointDistribution::new([
        [w[0] / total, w[1] / total, 0.0],
        [w[2] / total, w[3] / total, 0.0],
        [0.0; 3],
    ])
    .expect("normalized")
}

fn reduction_identities() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_chsh, mut worst_bell) = (0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let mut table: SettingsTable = [Setting::AB, Setting::ABPrime, Setting::APrimeB, Setting::APrimeBPrime]
            .into_iter()
            .map(|s| (s, detected_table(&mut rng)))
            .collect();
        let ineq19 = eval_ineq19(&table).map_err(|e| e.to_string())?.value;
        let chsh = eval_chsh(&table).map_err(|e| e.to_string())?.value;
        worst_chsh = worst_chsh.max((ineq19 - (chsh + 1.0)).abs());

        // a' = b': the two channels agree perfectly
        let plus: f64 = rng.gen();
        let aligned = JointDistribution::new([[plus, 0.0, 0.0], [0.0, 1.0 - plus, 0.0], [0.0; 3]])
            .map_err(|e| e.to_string())?;
        table.insert(Setting::APrimeBPrime, aligned);
        let chsh = eval_chsh(&table).map_err(|e| e.to_string())?.value;
        let bell = eval_bell65(&table).map_err(|e| e.to_string())?.value;
        worst_bell = worst_bell.max((chsh - (bell - 1.0)).abs());
    }
    Ok(check(
        worst_chsh < IDENTITY_TOL && worst_bell < IDENTITY_TOL,
        format!(
            "10^4 tables: max |INEQ19-(CHSH+1)| {worst_chsh:.1e}, max |CHSH-(BELL65-1)| {worst_bell:.1e} (< {IDENTITY_TOL:.0e})"
        ),
    ))
}

fn strong_value(params: ExperimentParams) -> Result<f64, String> {
    let config = AngleConfig::from_cli_order([0.0, 60.0, 120.0, 120.0, 120.0]).map_err(|e| e.to_string())?;
    let table = Source::Real(params)
        .settings_table(&config, &Setting::ALL)
        .map_err(|e| e.to_string())?;
    Ok(eval_strong(&table, StrongForm::Reduced).map_err(|e| e.to_string())?.value)
}

fn real_strong_inequality() -> Result<Outcome, String> {
    let params = ExperimentParams::new(0.9, 30.0).map_err(|e| e.to_string())?;
    let f = params.depolarization();
    let value = strong_value(params)?;
    let forced = strong_value(params.with_f_override(1.0).map_err(|e| e.to_string())?)?;
    let two_decimals = (f * 100.0).round() / 100.0;
    Ok(check(
        two_decimals == 0.99
            && (value - (1.0 - 2.5 * f)).abs() < STRONG_TOL
            && (value + 1.4700846792814621).abs() < STRONG_TOL
            && (forced + 1.5).abs() < IDEAL_VALUE_TOL,
        format!("F = {f:.5}, STRONG46 = {value:.8} (1-2.5F within {STRONG_TOL:.0e}); F=1 gives {forced:.17}"),
    ))
}

fn comparison_magnitudes() -> Result<Outcome, String> {
    let ch = eval_ch(&Source::Ideal, 22.5).map_err(|e| e.to_string())?;
    let fc = eval_fc(&Source::Ideal).map_err(|e| e.to_string())?;

    let at = |angles: [f64; 5]| {
        Source::Ideal
            .settings_table(&AngleConfig::from_cli_order(angles).expect("finite"), &Setting::ALL)
            .expect("ideal tables")
    };
    let ineq19 = eval_ineq19(&at([0.0, 60.0, 120.0, 120.0, 120.0])).map_err(|e| e.to_string())?;
    // a-b = b'-a = b-a' = 67.5 and a'-b' = 22.5 after reduction
    let chsh = eval_chsh(&at([0.0, 112.5, 45.0, 67.5, 0.0])).map_err(|e| e.to_string())?;
    let ratio = (ineq19.margin / 1.0) / (chsh.margin / 2.0);
    let expected_ratio = 0.5 / (2f64.sqrt() - 1.0);

    Ok(check(
        (ch.value - 0.20711).abs() < COMPARISON_TOL
            && ch.violated
            && (fc.value - 0.35355).abs() < COMPARISON_TOL
            && fc.violated
            && (ratio - 1.2071).abs() < RATIO_TOL
            && (ratio - expected_ratio).abs() < 1e-12,
        format!(
            "CH47 = {:.5}, FC48 = {:.5}, violation ratio {ratio:.5} (CHSH {:.6})",
            ch.value, fc.value, chsh.value
        ),
    ))
}

fn monte_carlo_convergence() -> Result<Outcome, String> {
    let args = ["simulate", "--ideal", "--angles", OPTIMAL, "--pairs", "1000000", "--seed", "20240601", "--format", "json"];
    let single = bellbench(&[&args[..], &["--threads", "1"]].concat())?;
    let four = bellbench(&[&args[..], &["--threads", "4"]].concat())?;
    let v: Value = serde_json::from_slice(&single).map_err(|e| e.to_string())?;
    let report = v["reports"]
        .as_array()
        .ok_or("no reports")?
        .iter()
        .find(|r| r["inequality"] == "INEQ19")
        .ok_or("no INEQ19 report")?;
    let value = float(&report["value"])?;
    let se = float(&report["std_error"])?;
    let sigmas = (value + 1.5).abs() / se;
    Ok(check(
        sigmas < MC_SIGMAS && se > 0.0 && single == four,
        format!(
            "INEQ19 = {value:.6} +- {se:.2e} ({sigmas:.2} sigma < {MC_SIGMAS}); 1 vs 4 threads {}",
            if single == four { "bit-identical" } else { "DIFFER" }
        ),
    ))
}

fn optimizer_recovery() -> Result<Outcome, String> {
    let strong = bellbench_json(&[
        "optimize", "--ideal", "--ineq", "strong46", "--free", "a,b,a'", "--grid-step", "5", "--tolerance", "0.01",
    ])?;
    let diffs: Vec<f64> = strong["differences"]
        .as_array()
        .ok_or("no differences")?
        .iter()
        .map(float)
        .collect::<Result<_, _>>()?;
    let angle_err = diffs
        .iter()
        .zip([120.0, 120.0, 120.0, 0.0])
        .map(|(&d, t)| circular_distance(d, t))
        .fold(0.0, f64::max);
    let strong_value = float(&strong["report"]["value"])?;

    let chsh = bellbench_json(&[
        "optimize", "--ideal", "--ineq", "chsh27", "--free", "a,b,a',b'", "--grid-step", "5", "--tolerance", "0.01",
    ])?;
    let chsh_value = float(&chsh["report"]["value"])?;
    let chsh_err = (chsh_value + 2.0 * 2f64.sqrt()).abs();
    Ok(check(
        angle_err <= ANGLE_TOL && (strong_value + 1.5).abs() < OPTIMUM_TOL && chsh_err < OPTIMUM_TOL,
        format!(
            "STRONG46 differences {diffs:?} (max dev {angle_err:.3} deg), value {strong_value:.9}; CHSH {chsh_value:.9} (|err| {chsh_err:.1e})"
        ),
    ))
}

fn assumption_hierarchy() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    let mut failures = 0;
    for _ in 0..10_000 {
        let rf = sample_response(&mut rng, Constraint::Gr);
        let gr = check_gr(&rf).map_err(|e| e.to_string())?;
        let supp = check_supplementary(&rf).map_err(|e| e.to_string())?;
        failures += usize::from(!(gr && supp));
    }

    // detection 0.5 at a and a', 0.9 at r: bounded by r but not equal to it
    let resp = |p: f64, m: f64| Response::new(p, m).expect("valid response");
    let side = SideResponses::full(resp(0.3, 0.2), resp(0.25, 0.25), resp(0.5, 0.4));
    let witness = ResponseFunction::new(side, side);
    let supp = check_supplementary(&witness).map_err(|e| e.to_string())?;
    let gr = check_gr(&witness).map_err(|e| e.to_string())?;

    // and one found by sampling
    let mut sampled_witness = false;
    for _ in 0..10_000 {
        let rf = sample_response(&mut rng, Constraint::Supplementary);
        if check_supplementary(&rf).map_err(|e| e.to_string())? && !check_gr(&rf).map_err(|e| e.to_string())? {
            sampled_witness = true;
            break;
        }
    }
    Ok(check(
        failures == 0 && supp && !gr && sampled_witness,
        format!(
            "10^4 GR samples, {failures} fail supplementary; witness (0.5 at a, 0.9 at r): supplementary {supp}, GR {gr}; sampled witness {sampled_witness}"
        ),
    ))
}

type Criterion = (u32, &'static str, fn() -> Result<Outcome, String>, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (1, "ideal maximal violation", ideal_maximal_violation, Duration::from_secs(1)),
        (2, "theorem tightness", theorem_tightness, Duration::from_secs(10)),
        (3, "local hidden-variable bound", lhv_bound, Duration::from_secs(10)),
        (4, "reduction identities", reduction_identities, Duration::from_secs(5)),
        (5, "real-experiment strong inequality", real_strong_inequality, Duration::from_secs(1)),
        (6, "comparison magnitudes", comparison_magnitudes, Duration::from_secs(1)),
        (7, "Monte Carlo convergence", monte_carlo_convergence, Duration::from_secs(60)),
        (8, "optimizer recovery", optimizer_recovery, Duration::from_secs(60)),
        (9, "assumption hierarchy", assumption_hierarchy, Duration::from_secs(5)),
    ];

    let mut failed = 0;
    for (number, name, run, limit) in criteria {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(outcome) => (outcome.passed && elapsed < limit, outcome.detail),
            Err(e) => (false, e),
        };
        failed += usize::from(!passed);
        println!(
            "{} [{number}] {name}: {detail} [{:.3} s, limit {} s]",
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
