//! Acceptance suite: one PASS/FAIL line per criterion, with the measured
//! quantity and the wall time against its budget. Exits nonzero when any
//! criterion fails.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use radial_core::decarli::{admissible_l_params, apply_l, check_invariance_1, check_invariance_2, DeCarliParams};
use radial_core::embedding::{
    check_embedding, estimate_best_constant, proof_chain_params, random_profiles, tail_integral, verify_inequality,
    EmbeddingParams, EstimatorOptions,
};
use radial_core::hankel::{HankelPlan, RadialGrid, RadialProfile};
use radial_core::solver::{
    build_basis, find_multiple, shooting_oracle, GalerkinBasis, SearchOptions, ShootingOptions,
};
use radial_core::space::{holder_interpolation, SobolevContext};
use radial_core::system::{
    default_scaling_exponent, grad_phi, scaling_ladder, scaling_powers, scaling_t, small_sphere_minimum,
    ProblemParams, SystemContext,
};
use radial_core::{config, Result};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

fn default_params() -> ProblemParams {
    ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).expect("default instance is admissible")
}

fn default_basis(k: usize) -> Result<GalerkinBasis> {
    let plan = Arc::new(HankelPlan::new(0.5, config::GRID_SIZE, config::CUTOFF)?);
    build_basis(&SystemContext::new(default_params(), plan)?, k)
}

fn rel_l2(got: &[f64], want: &[f64], grid: &RadialGrid) -> f64 {
    let dim = 2.0 * grid.alpha() + 2.0;
    let diff: Vec<f64> = got.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).collect();
    let sq: Vec<f64> = want.iter().map(|b| b * b).collect();
    (grid.integrate_radial(dim, &diff) / grid.integrate_radial(dim, &sq)).sqrt()
}

fn random_coeffs(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

fn self_inversion() -> Result<Outcome> {
    let plan = HankelPlan::new(0.5, 512, 40.0)?;
    let bump = |r: f64| if r < 5.0 { (-1.0 / (1.0 - (r / 5.0).powi(2))).exp() } else { 0.0 };
    let profiles: [(&str, &dyn Fn(f64) -> f64); 3] =
        [("gaussian", &|r: f64| (-0.5 * r * r).exp()), ("exponential", &|r: f64| (-r).exp()), ("bump", &bump)];
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for (name, f) in profiles {
        let input = RadialProfile::from_fn(plan.grid().clone(), f)?;
        let back = plan.apply(&plan.apply(&input)?)?;
        let err = rel_l2(back.values(), input.values(), plan.grid());
        parts.push(format!("{name} {err:.2e}"));
        worst = worst.max(err);
    }
    outcome(worst < 1e-8, parts.join(", "))
}

fn gaussian_fixed_point() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    for alpha in [0.0, 0.5, 1.0, 1.5, 2.0] {
        let plan = HankelPlan::new(alpha, 512, 40.0)?;
        let g = RadialProfile::from_fn(plan.grid().clone(), |r| (-0.5 * r * r).exp())?;
        let out = plan.apply(&g)?;
        for (&rho, &v) in plan.dual_grid().nodes().iter().zip(out.values()) {
            if rho < 20.0 {
                worst = worst.max((v - (-0.5 * rho * rho).exp()).abs());
            }
        }
    }
    outcome(worst < 1e-6, format!("max pointwise error {worst:.2e} on rho < 20"))
}

fn invariances() -> Result<Outcome> {
    let mut worst = 0.0_f64;
    let mut cases = 0;
    for alpha in [0.0, 0.5, 1.0, 1.5] {
        let plan = HankelPlan::new(alpha, 256, 30.0)?;
        let profiles = [
            RadialProfile::from_fn(plan.grid().clone(), |r| (-0.5 * r * r).exp())?,
            RadialProfile::from_fn(plan.grid().clone(), |r| (1.0 + r * r) * (-0.8 * r * r).exp())?,
        ];
        for f in &profiles {
            for nu in [-0.3, 0.0, 0.4] {
                for mu in [-0.5, 0.0, 0.5] {
                    let params = DeCarliParams::new(alpha, nu, mu)?;
                    let scale = apply_l(&params, &plan, f)?.max_abs();
                    for e in [-0.5, 0.7] {
                        let shifted = DeCarliParams { mu: mu + e, ..params };
                        let shifted_scale = apply_l(&shifted, &plan, f)?.max_abs().max(scale);
                        worst = worst.max(check_invariance_1(&params, &plan, f, e)? / shifted_scale);
                        cases += 1;
                    }
                    for sigma in [-0.3, 0.25] {
                        worst = worst.max(check_invariance_2(&params, &plan, f, sigma)? / scale);
                        cases += 1;
                    }
                }
            }
        }
    }
    outcome(worst < 1e-10, format!("{cases} cases, max relative discrepancy {worst:.2e}"))
}

fn sample_admissible(rng: &mut ChaCha8Rng) -> EmbeddingParams {
    let unit = Uniform::new(0.02, 0.98).expect("valid range");
    loop {
        let n = 2 + (unit.sample(rng) * 5.0) as u32;
        let nf = n as f64;
        let s = unit.sample(rng) * (nf / 2.0).min(2.0);
        let c = -2.0 * s + unit.sample(rng) * (2.0 * s + 3.0);
        let crit = EmbeddingParams::new(n, s, 3.0, c).critical_exponent().min(12.0);
        let params = EmbeddingParams::new(n, s, 2.0 + unit.sample(rng) * (crit - 2.0), c);
        if check_embedding(&params).overall {
            return params;
        }
    }
}

fn proof_chain() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(config::SEED);
    let mut failures = 0;
    let mut worst_gap = 0.0_f64;
    let mut worst_change = 0.0_f64;
    for _ in 0..100 {
        let params = sample_admissible(&mut rng);
        let chain = match proof_chain_params(&params) {
            Ok(chain) => chain,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let adm = admissible_l_params(&chain.operator, chain.p, params.q)?;
        let n = params.n as f64;
        let tail = tail_integral(params.n, chain.gamma, 1e-8, 1_000_000);
        worst_gap = worst_gap.max(adm.mu_gap.abs());
        worst_change = worst_change.max(tail.last_change);
        if !(adm.admissible && adm.mu_gap.abs() <= 1e-12 && chain.p > 2.0 * n / (2.0 * params.s + n) && tail.converged)
        {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!("{failures} of 100 failed, max mu gap {worst_gap:.1e}, max tail change {worst_change:.1e}"),
    )
}

fn embedding_inequality() -> Result<Outcome> {
    let params = EmbeddingParams::new(3, 1.0, 4.0, 1.0);
    let opts = EstimatorOptions::default();
    let plan = Arc::new(HankelPlan::new(0.5, 512, 40.0)?);
    let base = estimate_best_constant(&params, plan.clone(), &opts)?;
    let fine_plan = Arc::new(HankelPlan::new(0.5, 1024, 40.0)?);
    let fine = estimate_best_constant(&params, fine_plan, &EstimatorOptions { k: 2 * opts.k, ..opts })?;
    let change = (fine.c_est - base.c_est).abs() / base.c_est;
    let ctx = SobolevContext::new(3, 1.0, plan)?;
    let mut worst = 0.0_f64;
    for u in random_profiles(&ctx, opts.k, 100, config::SEED)? {
        worst = worst.max(verify_inequality(&ctx, &params, &u)?);
    }
    outcome(
        worst <= 1.05 * base.c_est && change < 0.01 && base.converged && fine.converged,
        format!("C_est {:.8}, max ratio {worst:.8}, refinement change {change:.2e}", base.c_est),
    )
}

fn near_critical() -> Result<Outcome> {
    let plan = Arc::new(HankelPlan::new(0.5, 512, 40.0)?);
    let crit = EmbeddingParams::new(3, 1.0, 4.0, 1.0).critical_exponent();
    let mut values = Vec::new();
    for gap in [2.0, 1.0, 0.5, 0.25, 0.125] {
        let params = EmbeddingParams::new(3, 1.0, crit - gap, 1.0);
        values.push(estimate_best_constant(&params, plan.clone(), &EstimatorOptions::default())?.c_est);
    }
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let shown: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    outcome(increasing, format!("C_est along q = {crit} - (2, 1, 1/2, 1/4, 1/8): {}", shown.join(", ")))
}

fn holder() -> Result<Outcome> {
    let (theta, r, q_tilde) = (2.0 / 3.0, 3.0, 6.0);
    let plan = Arc::new(HankelPlan::new(0.5, 512, 40.0)?);
    let ctx = SobolevContext::new(3, 1.0, plan)?;
    let mut worst = f64::INFINITY;
    for u in random_profiles(&ctx, 12, 50, config::SEED)? {
        let check = holder_interpolation(3, 1.0, r, q_tilde, theta, &u)?;
        worst = worst.min(check.slack / check.rhs);
    }
    outcome(worst >= 0.0, format!("q = {}, min relative slack {worst:.3e}", theta * r + (1.0 - theta) * q_tilde))
}

fn gradient() -> Result<Outcome> {
    let b = default_basis(config::BASIS_DIM)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config::SEED);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let z = random_coeffs(&mut rng, 2 * b.k());
        let g = grad_phi(&b, &z)?;
        let mut err = 0.0;
        let mut norm = 0.0;
        for i in 0..z.len() {
            let h = 1e-5 * z[i].abs().max(1.0);
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[i] += h;
            zm[i] -= h;
            let fd = (b.phi(&zp)? - b.phi(&zm)?) / (2.0 * h);
            err += (fd - g[i]).powi(2);
            norm += g[i] * g[i];
        }
        worst = worst.max((err / norm).sqrt());
    }
    outcome(worst < 1e-6, format!("max relative error {worst:.2e} over 20 states"))
}

fn solver_oracle() -> Result<Outcome> {
    let b = default_basis(12)?;
    let found = find_multiple(&b, &SearchOptions::default())?;
    let Some(cp) = found.points.first() else {
        return outcome(false, "no nontrivial critical point");
    };
    let state = b.state(&cp.coeffs())?;
    let radii: Vec<f64> = (0..=200).map(|j| 0.05 * j as f64).collect();
    let u = b.system().plan().interpolate(&state.u, &radii)?;
    let v = b.system().plan().interpolate(&state.v, &radii)?;
    let shot = shooting_oracle(b.system().params(), &radii, &ShootingOptions::default())?;
    let gap = u
        .iter()
        .zip(&shot.u)
        .chain(v.iter().zip(&shot.v))
        .fold(0.0_f64, |m, (a, s)| m.max((a - s).abs()));
    outcome(
        cp.residual < 1e-10 && gap < 1e-4,
        format!("residual {:.2e}, sup distance to shooting on [0, 10] {gap:.3e}", cp.residual),
    )
}

fn multiplicity() -> Result<Outcome> {
    let b = default_basis(16)?;
    let found = find_multiple(&b, &SearchOptions { target: 3, ..Default::default() })?;
    let pts = &found.points;
    let values: Vec<String> = pts.iter().map(|p| format!("{:.4}", p.phi_value)).collect();
    let distinct = pts.iter().enumerate().all(|(i, p)| pts[..i].iter().all(|o| p.distance(o) > 1e-3));
    let increasing = pts.windows(2).all(|w| w[1].phi_value > w[0].phi_value);
    let converged = pts.iter().all(|p| p.converged());
    outcome(
        pts.len() == 3 && distinct && increasing && converged,
        format!("{} points, Phi = [{}], {} starts", pts.len(), values.join(", "), found.starts_used),
    )
}

fn geometry() -> Result<Outcome> {
    let b = default_basis(config::BASIS_DIM)?;
    let minimum = small_sphere_minimum(&b, 0.1, 50, config::SEED)?;
    let rungs = 40;
    let rows = scaling_ladder(&b, 20, rungs, config::SEED)?;
    let top = 2f64.powi(rungs as i32 - 1);
    let negative = rows.iter().filter(|r| r.sample > 0 && r.lambda == top && r.phi < 0.0).count();
    let params = *b.system().params();
    let m = default_scaling_exponent(&params);
    let (mu, nu) = scaling_powers(&params, m);
    let mut rng = ChaCha8Rng::seed_from_u64(config::SEED);
    let mut worst = 0.0_f64;
    for lambda in [0.25, 2.0, 64.0] {
        let z = b.state(&random_coeffs(&mut rng, 2 * b.k()))?;
        let q0 = b.system().quadratic_part(&z)?;
        let ql = b.system().quadratic_part(&scaling_t(&params, m, lambda, &z)?)?;
        let want = lambda.powf(mu + nu) * q0;
        worst = worst.max((ql - want).abs() / want.abs());
    }
    outcome(
        minimum > 0.0 && negative == 20 && worst < 1e-10,
        format!("sphere minimum {minimum:.3e}, {negative} of 20 negative at lambda = 2^{}, scaling {worst:.1e}", rungs - 1),
    )
}

fn run_cli(dir: &std::path::Path) -> Result<Vec<u8>> {
    let out = Command::new(env!("CARGO_BIN_EXE_radial"))
        .args(["solve", "-n", "3", "-p", "4", "-q", "4", "-a", "0.5", "-b", "0.5", "--k", "8", "-D", "2"])
        .arg("--out-dir")
        .arg(dir)
        .output()?;
    let mut bytes = out.stdout;
    let mut names: Vec<_> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.file_name())).collect::<std::io::Result<_>>()?;
    names.sort();
    for name in names {
        bytes.extend(name.as_encoded_bytes());
        bytes.extend(std::fs::read(dir.join(&name))?);
    }
    Ok(bytes)
}

fn evenness_and_determinism() -> Result<Outcome> {
    let b = default_basis(config::BASIS_DIM)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config::SEED);
    let small = default_basis(8)?;
    let mut states: Vec<(&GalerkinBasis, Vec<f64>)> =
        (0..20).map(|_| (&b, random_coeffs(&mut rng, 2 * b.k()))).collect();
    states.extend(find_multiple(&small, &SearchOptions::default())?.points.iter().map(|p| (&small, p.coeffs())));
    let mut odd = 0;
    for (basis, z) in &states {
        let neg: Vec<f64> = z.iter().map(|c| -c).collect();
        if basis.phi(z)? != basis.phi(&neg)? {
            odd += 1;
        }
    }
    let first = tempfile::tempdir()?;
    let second = tempfile::tempdir()?;
    let a = run_cli(first.path())?;
    let c = run_cli(second.path())?;
    outcome(
        odd == 0 && a == c && !a.is_empty(),
        format!("{odd} of {} states not even, CLI outputs identical: {} ({} bytes)", states.len(), a == c, a.len()),
    )
}

type Criterion = (&'static str, u64, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 12] = [
    ("transform self-inversion", 5, self_inversion),
    ("gaussian fixed point", 5, gaussian_fixed_point),
    ("operator invariances", 30, invariances),
    ("proof-chain consistency", 10, proof_chain),
    ("embedding inequality", 120, embedding_inequality),
    ("near-critical growth", 180, near_critical),
    ("interpolation inequality", 30, holder),
    ("gradient correctness", 30, gradient),
    ("solver and shooting oracle", 120, solver_oracle),
    ("multiplicity", 300, multiplicity),
    ("geometry of the functional", 60, geometry),
    ("evenness and determinism", 10, evenness_and_determinism),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (i, (name, budget, run)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(err) => (false, format!("error: {err}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

