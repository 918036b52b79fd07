use crate::config;
use crate::error::{Error, Result};
use crate::system::ProblemParams;

/// Settings of the radial shooting solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// number of sign changes of `u` (0 for the ground state)
    pub nodal_index: usize,
    /// starting radius of the integration
    pub eps: f64,
    /// radius where trajectories are classified or matched to decay
    pub r_match: f64,
    pub rtol: f64,
    /// starting values for the two-parameter search used when the data are
    /// not symmetric
    pub initial_guess: Option<(f64, f64)>,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self { nodal_index: 0, eps: config::SHOOTING_START, r_match: 12.0, rtol: 1e-12, initial_guess: None }
    }
}

/// Radial profiles on the requested radii.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingSolution {
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u0: f64,
    pub v0: f64,
    /// `max(|u' + kappa u|, |v' + kappa v|)` at the last radius, with the
    /// decay rate `kappa = 1 + (n-1)/(2r)` of the linearised equation
    pub mismatch: f64,
    /// final bisection bracket on `u(0)` (symmetric data only)
    pub bracket: Option<(f64, f64)>,
}

type State = [f64; 4];

/// `y = (u, u', v, v')` for
/// `u'' + (n-1)/r u' = u - r^a |v|^(p-2) v`, `v'' + (n-1)/r v' = v - r^b |u|^(q-2) u`.
fn rhs(params: &ProblemParams, r: f64, y: &State) -> State {
    let n1 = params.n as f64 - 1.0;
    let hv = r.powf(params.a) * y[2].abs().powf(params.p - 2.0) * y[2];
    let hu = r.powf(params.b) * y[0].abs().powf(params.q - 2.0) * y[0];
    [y[1], -n1 / r * y[1] + y[0] - hv, y[3], -n1 / r * y[3] + y[2] - hu]
}

/// Regular expansion at small `r`: `u = u0 + u0 r^2/(2n) - |v0|^(p-2) v0 r^(a+2)/((a+2)(a+n))`.
fn initial_state(params: &ProblemParams, u0: f64, v0: f64, r: f64) -> State {
    let n = params.n as f64;
    let (a, b) = (params.a, params.b);
    let gv = v0.abs().powf(params.p - 2.0) * v0;
    let gu = u0.abs().powf(params.q - 2.0) * u0;
    [
        u0 + u0 * r * r / (2.0 * n) - gv * r.powf(a + 2.0) / ((a + 2.0) * (a + n)),
        u0 * r / n - gv * r.powf(a + 1.0) / (a + n),
        v0 + v0 * r * r / (2.0 * n) - gu * r.powf(b + 2.0) / ((b + 2.0) * (b + n)),
        v0 * r / n - gu * r.powf(b + 1.0) / (b + n),
    ]
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn dp_step(params: &ProblemParams, r: f64, y: &State, h: f64) -> (State, f64, f64) {
    let mut k = [[0.0; 4]; 7];
    for s in 0..7 {
        let mut ys = *y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for i in 0..4 {
                ys[i] += h * A[s][j] * kj[i];
            }
        }
        k[s] = rhs(params, r + C[s] * h, &ys);
    }
    let mut y5 = *y;
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..4 {
        let (mut d5, mut d4) = (0.0, 0.0);
        for s in 0..7 {
            d5 += B5[s] * k[s][i];
            d4 += B4[s] * k[s][i];
        }
        y5[i] += h * d5;
        err = err.max((h * (d5 - d4)).abs());
        scale = scale.max(y[i].abs().max(y5[i].abs()));
    }
    (y5, err, scale)
}

/// Integrates from `eps` through the increasing `outputs`, recording the
/// state at each of them. `observe` sees every accepted step and may stop
/// the integration by returning `false`.
fn integrate(
    params: &ProblemParams,
    u0: f64,
    v0: f64,
    opts: &ShootingOptions,
    outputs: &[f64],
    mut observe: impl FnMut(f64, &State) -> bool,
) -> Vec<State> {
    let mut r = opts.eps;
    let mut y = initial_state(params, u0, v0, r);
    let mut h: f64 = 1e-3;
    let mut recorded = Vec::with_capacity(outputs.len());
    for &target in outputs {
        while r < target {
            let clipped = h.min(target - r);
            let (y_new, err, scale) = dp_step(params, r, &y, clipped);
            let tol = opts.rtol * scale.max(1e-200);
            if err <= tol || clipped < 1e-12 {
                r = if clipped == target - r { target } else { r + clipped };
                y = y_new;
                if !y.iter().all(|v| v.is_finite()) || !observe(r, &y) {
                    return recorded;
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0) };
            h = clipped * factor;
        }
        recorded.push(y);
    }
    recorded
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// more sign changes than the nodal index
    High,
    /// turned back towards growth, or blew up, before the next sign change
    Low,
}

fn classify(params: &ProblemParams, x: f64, opts: &ShootingOptions) -> Shot {
    let mut zeros = 0;
    let mut prev = x;
    let mut decreasing = false;
    let mut verdict = None;
    let kappa = 1.0 + (params.n as f64 - 1.0) / (2.0 * opts.r_match);
    let end = integrate(params, x, x, opts, &[opts.r_match], |_, y| {
        if y[0] == 0.0 || y[0].signum() != prev.signum() {
            zeros += 1;
            decreasing = false;
            if zeros > opts.nodal_index {
                verdict = Some(Shot::High);
                return false;
            }
        }
        prev = if y[0] == 0.0 { -prev } else { y[0] };
        let radial = y[0] * y[1];
        if radial < 0.0 {
            decreasing = true;
        } else if decreasing || y[0].abs() > 1e6 * x.abs().max(1.0) {
            verdict = Some(Shot::Low);
            return false;
        }
        true
    });
    // undecided at r_match: a negative growing-mode component means the
    // next sign change is ahead
    verdict.unwrap_or_else(|| match end.last() {
        Some(y) if (y[1] + kappa * y[0]) * y[0] < 0.0 => Shot::High,
        _ => Shot::Low,
    })
}

fn decay_mismatch(params: &ProblemParams, r: f64, y: &State) -> f64 {
    let kappa = 1.0 + (params.n as f64 - 1.0) / (2.0 * r);
    (y[1] + kappa * y[0]).abs().max((y[3] + kappa * y[2]).abs())
}

fn sample(params: &ProblemParams, u0: f64, v0: f64, radii: &[f64], opts: &ShootingOptions) -> Result<ShootingSolution> {
    let positive: Vec<f64> = radii.iter().copied().filter(|&r| r > opts.eps).collect();
    let states = integrate(params, u0, v0, opts, &positive, |_, _| true);
    if states.len() != positive.len() {
        return Err(Error::NotConverged("trajectory became non-finite before the last radius".into()));
    }
    let mut u = Vec::with_capacity(radii.len());
    let mut v = Vec::with_capacity(radii.len());
    let mut it = states.iter();
    for &r in radii {
        if r > opts.eps {
            let y = it.next().expect("one state per positive radius");
            u.push(y[0]);
            v.push(y[2]);
        } else {
            let y = initial_state(params, u0, v0, r.max(0.0));
            u.push(y[0]);
            v.push(y[2]);
        }
    }
    let last = *radii.last().expect("non-empty radii");
    let mismatch = match states.last() {
        Some(y) => decay_mismatch(params, last, y),
        None => 0.0,
    };
    Ok(ShootingSolution { r: radii.to_vec(), u, v, u0, v0, mismatch, bracket: None })
}

/// Radial solution of the system for `s = t = 1` by shooting from the origin.
///
/// Symmetric data (`p = q`, `a = b`) reduce to one equation with `u = v`;
/// `u(0)` is bisected between trajectories with too many sign changes and
/// trajectories that turn back before the next one. Otherwise a Newton
/// iteration on `(u(0), v(0))` matches the decay rate on radii growing out
/// to `r_match`, starting from `initial_guess`. The antisymmetric mode grows
/// fast, so the guess must be close (a converged Galerkin point's values at
/// the origin are typical).
pub fn shooting_oracle(params: &ProblemParams, radii: &[f64], opts: &ShootingOptions) -> Result<ShootingSolution> {
    if params.s != 1.0 || params.t != 1.0 {
        return Err(Error::Domain(format!("shooting needs s = t = 1, got s = {}, t = {}", params.s, params.t)));
    }
    if radii.is_empty() || radii.windows(2).any(|w| w[1] <= w[0]) || radii[0] < 0.0 {
        return Err(Error::InvalidArgument("radii must be non-empty, nonnegative and increasing".into()));
    }
    if params.p == params.q && params.a == params.b {
        symmetric(params, radii, opts)
    } else {
        let guess = opts
            .initial_guess
            .ok_or_else(|| Error::InvalidArgument("non-symmetric shooting needs an initial guess".into()))?;
        matched(params, radii, opts, guess)
    }
}

fn symmetric(params: &ProblemParams, radii: &[f64], opts: &ShootingOptions) -> Result<ShootingSolution> {
    let mut lo = 1e-3;
    if classify(params, lo, opts) != Shot::Low {
        return Err(Error::NotConverged(format!("no undershoot at u(0) = {lo}")));
    }
    let mut hi = lo;
    loop {
        hi *= 1.25;
        if hi > 1e6 {
            return Err(Error::NotConverged(format!("no overshoot below u(0) = {hi:.3e}; bracket ({lo}, inf)")));
        }
        if classify(params, hi, opts) == Shot::High {
            break;
        }
        lo = hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(params, mid, opts) {
            Shot::Low => lo = mid,
            Shot::High => hi = mid,
        }
    }
    let mut sol = sample(params, lo, lo, radii, opts)?;
    sol.bracket = Some((lo, hi));
    Ok(sol)
}

/// Matching radii used on the way out to `r_match`: the map from `(u(0), v(0))`
/// to the decay mismatch grows like `e^(2r)`, so each Newton solve starts
/// from the previous, shorter one.
const MATCH_LADDER: [f64; 6] = [3.0, 4.0, 5.0, 6.0, 8.0, 10.0];

const MATCH_TOLERANCE: f64 = 1e-8;

fn matched(params: &ProblemParams, radii: &[f64], opts: &ShootingOptions, guess: (f64, f64)) -> Result<ShootingSolution> {
    let mut x = guess;
    for r in MATCH_LADDER.iter().copied().filter(|&r| r < opts.r_match).chain([opts.r_match]) {
        x = match_at(params, opts, r, x)?;
    }
    sample(params, x.0, x.1, radii, opts)
}

fn match_at(params: &ProblemParams, opts: &ShootingOptions, r_fit: f64, guess: (f64, f64)) -> Result<(f64, f64)> {
    let kappa = 1.0 + (params.n as f64 - 1.0) / (2.0 * r_fit);
    let residual = |x: f64, y: f64| -> Option<[f64; 2]> {
        let states = integrate(params, x, y, opts, &[r_fit], |_, _| true);
        states.last().map(|s| [s[1] + kappa * s[0], s[3] + kappa * s[2]])
    };
    let size = |f: &[f64; 2]| f[0].abs().max(f[1].abs());
    let (mut x, mut y) = guess;
    let mut f = residual(x, y).ok_or_else(|| Error::NotConverged(format!("blow-up at (u0, v0) = ({x}, {y}), r = {r_fit}")))?;
    for _ in 0..60 {
        if size(&f) < 1e-13 * x.abs().max(y.abs()).max(1.0) {
            return Ok((x, y));
        }
        let hx = 1e-7 * x.abs().max(1e-3);
        let hy = 1e-7 * y.abs().max(1e-3);
        let jacobian_failed = || Error::NotConverged(format!("blow-up in Jacobian at ({x}, {y})"));
        let fx = residual(x + hx, y).ok_or_else(jacobian_failed)?;
        let fy = residual(x, y + hy).ok_or_else(jacobian_failed)?;
        let j = [[(fx[0] - f[0]) / hx, (fy[0] - f[0]) / hy], [(fx[1] - f[1]) / hx, (fy[1] - f[1]) / hy]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::NotConverged(format!("singular shooting Jacobian at ({x}, {y})")));
        }
        let dx = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let dy = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        if dx.abs().max(dy.abs()) <= 1e-15 * x.abs().max(y.abs()) {
            return Ok((x, y));
        }
        let mut step = 1.0;
        loop {
            if let Some(g) = residual(x + step * dx, y + step * dy) {
                if size(&g) < size(&f) {
                    x += step * dx;
                    y += step * dy;
                    f = g;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-8 {
                // rounding floor of the amplified mismatch
                if size(&f) < MATCH_TOLERANCE {
                    return Ok((x, y));
                }
                return Err(Error::NotConverged(format!("decay matching stalled at ({x}, {y}), r = {r_fit}")));
            }
        }
    }
    if size(&f) < MATCH_TOLERANCE {
        Ok((x, y))
    } else {
        Err(Error::NotConverged(format!("decay matching did not converge at r = {r_fit}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(to: f64, m: usize) -> Vec<f64> {
        (0..=m).map(|j| to * j as f64 / m as f64).collect()
    }

    #[test]
    fn linear_decay_matches_bessel_potential() {
        // without the nonlinearity u = sinh(r)/r solves the n = 3 equation from u(0) = 1
        let params = ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).unwrap();
        let opts = ShootingOptions::default();
        let radii = [0.5, 1.0, 2.0];
        let tiny = 1e-9;
        let states = integrate(&params, tiny, tiny, &opts, &radii, |_, _| true);
        for (r, y) in radii.iter().zip(states) {
            let want = tiny * r.sinh() / r;
            assert!((y[0] - want).abs() < 1e-10 * want, "r {r}");
        }
    }

    #[test]
    fn ground_state_of_symmetric_instance() {
        let params = ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).unwrap();
        let sol = shooting_oracle(&params, &uniform(10.0, 200), &ShootingOptions::default()).unwrap();
        assert!((sol.u0 - 3.2625066139220413).abs() < 1e-7, "{}", sol.u0);
        assert!(sol.u.iter().zip(&sol.v).all(|(a, b)| (a - b).abs() < 1e-8));
        assert!(sol.u.iter().all(|&x| x > 0.0));
        assert!(sol.mismatch < 1e-8, "{}", sol.mismatch);
    }

    #[test]
    fn requires_unit_split() {
        let params = ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).unwrap().with_s(0.9).unwrap();
        assert!(matches!(shooting_oracle(&params, &[0.0, 1.0], &ShootingOptions::default()), Err(Error::Domain(_))));
    }

    #[test]
    fn decay_matching_agrees_with_bisection() {
        let params = ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).unwrap();
        let radii = uniform(10.0, 100);
        let opts = ShootingOptions::default();
        let bisected = shooting_oracle(&params, &radii, &opts).unwrap();
        let matched = matched(&params, &radii, &opts, (3.25, 3.27)).unwrap();
        assert!((matched.u0 - bisected.u0).abs() < 1e-8, "{} vs {}", matched.u0, bisected.u0);
        assert!((matched.v0 - bisected.v0).abs() < 1e-8);
    }

    #[test]
    fn zero_data_give_zero_solution() {
        let params = ProblemParams::new(3, 4.0, 4.0, 0.5, 0.5).unwrap();
        let sol = sample(&params, 0.0, 0.0, &uniform(5.0, 10), &ShootingOptions::default()).unwrap();
        assert!(sol.u.iter().chain(&sol.v).all(|&x| x == 0.0));
        assert_eq!(sol.mismatch, 0.0);
    }

    #[test]
    fn non_symmetric_needs_guess() {
        let params = ProblemParams::new(3, 4.0, 5.0, 0.5, 1.375).unwrap();
        assert!((params.s - 1.0).abs() < 1e-12, "{}", params.s);
        let err = shooting_oracle(&params, &[0.0, 1.0], &ShootingOptions::default());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }
}
