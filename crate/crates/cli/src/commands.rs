use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use radial_core::embedding::{
    check_embedding, estimate_best_constant, sweep, sweep_csv, EmbeddingParams, EstimatorOptions,
};
use radial_core::hankel::HankelPlan;
use radial_core::solver::{
    build_basis, find_multiple, shooting_oracle, CriticalPoint, GalerkinBasis, NewtonOptions, SearchOptions,
    ShootingOptions,
};
use radial_core::system::{
    choose_st, scaling_ladder, small_sphere_minimum, ProblemParams, RawParams, SystemContext,
};
use radial_core::{Error, Result};
use serde_json::json;

use crate::args::{EmbedArgs, EmbedMode, GeometryArgs, GlobalArgs, SolveArgs, SystemFlags};
use crate::{EXIT_EMPTY, EXIT_INADMISSIBLE, EXIT_NOT_CONVERGED, EXIT_OK};

/// Radius up to which solutions are compared with the shooting solver.
const ORACLE_RADIUS: f64 = 10.0;
const ORACLE_POINTS: usize = 200;

fn raw_params(flags: &SystemFlags) -> Result<RawParams> {
    let mut raw = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
            RawParams::parse(&text)?
        }
        None => {
            let missing = |name: &str| Error::Parse(format!("missing -{name}"));
            RawParams {
                n: flags.n.ok_or_else(|| missing("n"))?,
                p: flags.p.ok_or_else(|| missing("p"))?,
                q: flags.q.ok_or_else(|| missing("q"))?,
                a: flags.a.ok_or_else(|| missing("a"))?,
                b: flags.b.ok_or_else(|| missing("b"))?,
                s: None,
            }
        }
    };
    if flags.s.is_some() {
        raw.s = flags.s;
    }
    Ok(raw)
}

fn system(global: &GlobalArgs, params: ProblemParams) -> Result<SystemContext> {
    let plan = Arc::new(HankelPlan::new(params.n as f64 / 2.0 - 1.0, global.size, global.cutoff)?);
    SystemContext::new(params, plan)
}

pub fn check(flags: &SystemFlags) -> Result<u8> {
    let raw = raw_params(flags)?;
    let report = raw.report();
    println!("n={} p={} q={} a={} b={}", raw.n, raw.p, raw.q, raw.a, raw.b);
    println!("{report}");
    if !report.overall {
        return Ok(EXIT_INADMISSIBLE);
    }
    match choose_st(raw.n, raw.p, raw.q, raw.a, raw.b) {
        Ok(split) => {
            println!("s interval: ({}, {})", split.lower, split.upper);
            let params = raw.build()?;
            println!("s={} t={}", params.s, params.t);
            Ok(EXIT_OK)
        }
        Err(err @ Error::EmptyFeasibleInterval { .. }) => {
            println!("{err}");
            Ok(EXIT_INADMISSIBLE)
        }
        Err(err) => Err(err),
    }
}

pub fn embed(global: &GlobalArgs, args: &EmbedArgs) -> Result<u8> {
    let opts = EstimatorOptions { k: args.k, seed: global.seed, ..Default::default() };
    match args.mode {
        EmbedMode::Check | EmbedMode::Constant => {
            let (q, c) = (args.q.expect("required by clap"), args.c.expect("required by clap"));
            let params = EmbeddingParams::new(args.n, args.s, q, c);
            let report = check_embedding(&params);
            println!("n={} s={} q={} c={}", params.n, params.s, params.q, params.c);
            println!("{report}");
            println!("critical exponent 2(n+c)/(n-2s) = {}", params.critical_exponent());
            if !report.overall {
                return Ok(EXIT_INADMISSIBLE);
            }
            if args.mode == EmbedMode::Check {
                return Ok(EXIT_OK);
            }
            let alpha = params.n as f64 / 2.0 - 1.0;
            let plan = Arc::new(HankelPlan::new(alpha, global.size, global.cutoff)?);
            let base = estimate_best_constant(&params, plan, &opts)?;
            println!("C_est = {:.10} (N={}, K={}, iterations {})", base.c_est, global.size, opts.k, base.iterations);
            let fine_plan = Arc::new(HankelPlan::new(alpha, 2 * global.size, global.cutoff)?);
            let fine_opts = EstimatorOptions { k: 2 * opts.k, ..opts };
            let fine = estimate_best_constant(&params, fine_plan, &fine_opts)?;
            let change = (fine.c_est - base.c_est).abs() / base.c_est;
            println!(
                "refined C_est = {:.10} (N={}, K={}), relative change {:.3e}",
                fine.c_est,
                2 * global.size,
                fine_opts.k,
                change
            );
            if base.converged && fine.converged {
                Ok(EXIT_OK)
            } else {
                println!("estimator did not converge");
                Ok(EXIT_NOT_CONVERGED)
            }
        }
        EmbedMode::Sweep => {
            let tuples: Vec<EmbeddingParams> = args
                .qs
                .iter()
                .flat_map(|&q| args.cs.iter().map(move |&c| (q, c)))
                .map(|(q, c)| EmbeddingParams::new(args.n, args.s, q, c))
                .collect();
            let rows = sweep(&tuples, global.size, global.cutoff, &opts)?;
            let csv = sweep_csv(&rows);
            match &args.output {
                Some(path) => fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(if rows.iter().all(|r| r.converged) { EXIT_OK } else { EXIT_NOT_CONVERGED })
        }
    }
}

fn solution_csv(basis: &GalerkinBasis, cp: &CriticalPoint) -> Result<String> {
    let state = basis.state(&cp.coeffs())?;
    let mut out = String::from("r,u,v\n");
    for ((r, u), v) in state.u.grid().nodes().iter().zip(state.u.values()).zip(state.v.values()) {
        let _ = writeln!(out, "{r:.16e},{u:.16e},{v:.16e}");
    }
    Ok(out)
}

/// Sign changes of `values`, ignoring entries below `1e-6` of the maximum.
fn sign_changes(values: &[f64]) -> usize {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut last = 0.0;
    let mut count = 0;
    for &v in values.iter().filter(|v| v.abs() > 1e-6 * peak) {
        if last != 0.0 && v.signum() != last {
            count += 1;
        }
        last = v.signum();
    }
    count
}

/// Sup-norm distance on `[0, ORACLE_RADIUS]` between a Galerkin point and
/// the shooting solution with the same number of sign changes.
fn oracle_distance(basis: &GalerkinBasis, cp: &CriticalPoint) -> Result<f64> {
    let state = basis.state(&cp.coeffs())?;
    let plan = basis.system().plan();
    let radii: Vec<f64> = (0..=ORACLE_POINTS).map(|j| ORACLE_RADIUS * j as f64 / ORACLE_POINTS as f64).collect();
    let u = plan.interpolate(&state.u, &radii)?;
    let v = plan.interpolate(&state.v, &radii)?;
    let opts = ShootingOptions { nodal_index: sign_changes(&u), initial_guess: Some((u[0], v[0])), ..Default::default() };
    let shot = shooting_oracle(basis.system().params(), &radii, &opts)?;
    let du = u.iter().zip(&shot.u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let dv = v.iter().zip(&shot.v).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(du.max(dv))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::write(dir.join(name), contents).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))
}

pub fn solve(global: &GlobalArgs, args: &SolveArgs) -> Result<u8> {
    let params = raw_params(&args.system)?.build()?;
    let sys = system(global, params)?;
    let basis = build_basis(&sys, args.k)?;
    let opts = SearchOptions {
        target: args.count,
        budget: args.budget,
        seed: global.seed,
        newton: NewtonOptions { tol: args.tol, ..Default::default() },
        ..Default::default()
    };
    let found = find_multiple(&basis, &opts)?;
    println!("{params}");
    println!("k={} N={} R={} seed={:#x} starts={}", args.k, global.size, global.cutoff, global.seed, found.starts_used);
    if found.points.is_empty() {
        println!("no nontrivial solution found");
        return Ok(EXIT_EMPTY);
    }
    let oracle_applies = params.s == 1.0 && params.t == 1.0;
    if args.oracle && !oracle_applies {
        println!("oracle skipped: needs s = t = 1 (s = {})", params.s);
    }
    fs::create_dir_all(&global.out_dir)?;
    let mut code = EXIT_OK;
    println!("index,phi,residual,iterations{}", if args.oracle && oracle_applies { ",oracle_sup" } else { "" });
    for (i, cp) in found.points.iter().enumerate() {
        let index = i + 1;
        let oracle = if args.oracle && oracle_applies {
            match oracle_distance(&basis, cp) {
                Ok(d) => Some(d),
                Err(err) => {
                    eprintln!("oracle failed for solution {index}: {err}");
                    code = EXIT_NOT_CONVERGED;
                    None
                }
            }
        } else {
            None
        };
        let csv = solution_csv(&basis, cp)?;
        write_file(&global.out_dir, &format!("solution_{index}.csv"), &csv)?;
        let meta = json!({
            "index": index,
            "params": { "n": params.n, "p": params.p, "q": params.q, "a": params.a, "b": params.b, "s": params.s, "t": params.t },
            "k": args.k,
            "grid_size": global.size,
            "cutoff": global.cutoff,
            "seed": global.seed,
            "residual": cp.residual,
            "phi_value": cp.phi_value,
            "iterations": cp.iterations,
            "oracle_sup": oracle,
        });
        let text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))? + "\n";
        write_file(&global.out_dir, &format!("solution_{index}.json"), &text)?;
        let mut row = format!("{index},{:.10},{:.3e},{}", cp.phi_value, cp.residual, cp.iterations);
        if args.oracle && oracle_applies {
            let _ = write!(row, ",{}", oracle.map_or("failed".to_string(), |d| format!("{d:.3e}")));
        }
        println!("{row}");
    }
    if found.shortfall > 0 {
        println!("shortfall: {} of {} requested", found.shortfall, args.count);
    }
    Ok(code)
}

pub fn geometry(global: &GlobalArgs, args: &GeometryArgs) -> Result<u8> {
    let params = raw_params(&args.system)?.build()?;
    let sys = system(global, params)?;
    let basis = build_basis(&sys, args.k)?;
    let rows = scaling_ladder(&basis, args.samples, args.rungs, global.seed)?;
    println!("{params}");
    println!("sample,lambda,phi");
    for r in &rows {
        println!("{},{},{:.10e}", r.sample, r.lambda, r.phi);
    }
    let top = rows.iter().filter(|r| r.sample > 0 && r.lambda == 2f64.powi(args.rungs as i32 - 1));
    let negative = top.clone().filter(|r| r.phi < 0.0).count();
    println!("negative at lambda = {}: {} of {}", 2f64.powi(args.rungs as i32 - 1), negative, top.count());
    let minimum = small_sphere_minimum(&basis, args.radius, args.directions, global.seed)?;
    println!("small-sphere minimum on E+ at radius {}: {:.10e}", args.radius, minimum);
    Ok(EXIT_OK)
}
