use rand::Rng;
use rand_distr::{Exp, StandardNormal};

use super::quadrature::{integrate_real_line, QuadratureOptions};
use crate::error::{Error, Result};
use crate::kernels::swap_acceptance_with_delta;
use crate::ladder::RhoBounds;
use crate::rng::StreamRng;

/// A one-dimensional density whose tempered versions `π^β` can be integrated
/// numerically.
pub trait OracleTarget: Send + Sync {
    fn name(&self) -> &str;

    /// Unnormalized `log π(x)`.
    fn log_density(&self, x: f64) -> f64;

    /// Width of `π^β`, used to map the real line onto a finite interval.
    fn scale(&self, beta: f64) -> f64;

    /// Sorted points with `log π(y) = level`; kinks of the swap integrand.
    fn level_set(&self, _level: f64) -> Vec<f64> {
        Vec::new()
    }

    /// A draw from `π^β`, when exact sampling is available.
    fn sample_tempered(&self, _beta: f64, _rng: &mut StreamRng) -> Option<f64> {
        None
    }
}

/// `N(0, 1)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StandardNormalTarget;

impl OracleTarget for StandardNormalTarget {
    fn name(&self) -> &str {
        "normal"
    }

    fn log_density(&self, x: f64) -> f64 {
        -0.5 * x * x
    }

    fn scale(&self, beta: f64) -> f64 {
        beta.sqrt().recip()
    }

    fn level_set(&self, level: f64) -> Vec<f64> {
        let r = (-2.0 * level).max(0.0).sqrt();
        vec![-r, r]
    }

    fn sample_tempered(&self, beta: f64, rng: &mut StreamRng) -> Option<f64> {
        let z: f64 = rng.sample(StandardNormal);
        Some(z / beta.sqrt())
    }
}

/// Standard Laplace, `π(x) ∝ exp(−|x|)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LaplaceTarget;

impl OracleTarget for LaplaceTarget {
    fn name(&self) -> &str {
        "laplace"
    }

    fn log_density(&self, x: f64) -> f64 {
        -x.abs()
    }

    fn scale(&self, beta: f64) -> f64 {
        beta.recip()
    }

    fn level_set(&self, level: f64) -> Vec<f64> {
        let r = (-level).max(0.0);
        vec![-r, r]
    }

    fn sample_tempered(&self, beta: f64, rng: &mut StreamRng) -> Option<f64> {
        let e: f64 = rng.sample(Exp::new(beta).ok()?);
        Some(if rng.random::<bool>() { e } else { -e })
    }
}

/// Equal mixture of `N(−m, 1)` and `N(m, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct BimodalTarget {
    pub separation: f64,
}

impl Default for BimodalTarget {
    fn default() -> Self {
        Self { separation: 2.0 }
    }
}

impl OracleTarget for BimodalTarget {
    fn name(&self) -> &str {
        "bimodal"
    }

    // ½(φ(x−m) + φ(x+m)) ∝ exp(−x²/2 − m²/2) cosh(m x)
    fn log_density(&self, x: f64) -> f64 {
        let m = self.separation;
        let a = (m * x).abs();
        let log_cosh = a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2;
        -0.5 * x * x - 0.5 * m * m + log_cosh
    }

    fn scale(&self, beta: f64) -> f64 {
        (self.separation + 1.0) / beta.sqrt()
    }
}

/// Oracle targets selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleTargetKind {
    Normal,
    Laplace,
    Bimodal,
}

impl OracleTargetKind {
    pub const ALL: [OracleTargetKind; 3] = [OracleTargetKind::Normal, OracleTargetKind::Laplace, OracleTargetKind::Bimodal];

    pub fn build(self) -> Box<dyn OracleTarget> {
        match self {
            OracleTargetKind::Normal => Box::new(StandardNormalTarget),
            OracleTargetKind::Laplace => Box::new(LaplaceTarget),
            OracleTargetKind::Bimodal => Box::new(BimodalTarget::default()),
        }
    }
}

impl std::str::FromStr for OracleTargetKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" | "gaussian" => Ok(OracleTargetKind::Normal),
            "laplace" => Ok(OracleTargetKind::Laplace),
            "bimodal" => Ok(OracleTargetKind::Bimodal),
            other => Err(format!("unknown oracle target `{other}` (expected normal, laplace or bimodal)")),
        }
    }
}

fn check_exponent(name: &str, e: f64) -> Result<()> {
    if e > 0.0 && e <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(name, format!("tempering exponent must lie in (0, 1], got {e}")))
    }
}

/// `Z(β) = ∫ π^β`.
pub fn normalizing_constant(target: &dyn OracleTarget, beta: f64, opts: QuadratureOptions) -> Result<f64> {
    check_exponent("beta", beta)?;
    let breaks = target.level_set(f64::NEG_INFINITY);
    let breaks: Vec<f64> = breaks.into_iter().filter(|b| b.is_finite()).collect();
    Ok(integrate_real_line(|x| (beta * target.log_density(x)).exp(), &breaks, 0.0, target.scale(beta), opts)?.value)
}

/// Stationary mean swap acceptance between tempering exponents `v` and `u`:
///
/// `h̃(u, v) = ∬ (1 ∧ (π(y)/π(x))^{v−u}) π^v(x)/Z(v) · π^u(y)/Z(u) dx dy`,
///
/// evaluated by nested adaptive quadrature; the inner integral is split at
/// the level set `π(y) = π(x)` when the target provides it.
pub fn h_tilde(target: &dyn OracleTarget, u: f64, v: f64) -> Result<f64> {
    h_tilde_with(target, u, v, QuadratureOptions::default())
}

pub fn h_tilde_with(target: &dyn OracleTarget, u: f64, v: f64, opts: QuadratureOptions) -> Result<f64> {
    check_exponent("u", u)?;
    check_exponent("v", v)?;
    if u == v {
        return Ok(1.0);
    }
    let inner_opts = QuadratureOptions {
        abs_tol: opts.abs_tol * 0.1,
        rel_tol: opts.rel_tol * 0.1,
        ..opts
    };
    let zu = normalizing_constant(target, u, opts)?;
    let zv = normalizing_constant(target, v, opts)?;
    let (su, sv) = (target.scale(u), target.scale(v));
    let inner = |x: f64| -> Result<f64> {
        let lx = target.log_density(x);
        let breaks = target.level_set(lx);
        let f = |y: f64| {
            let ly = target.log_density(y);
            (u * ly + ((v - u) * (ly - lx)).min(0.0)).exp()
        };
        Ok(integrate_real_line(f, &breaks, 0.0, su, inner_opts)?.value / zu)
    };
    // the outer integrand is only evaluated at quadrature nodes; errors from
    // the inner integral are carried out through this cell
    let failure = std::sync::Mutex::new(None);
    let outer = |x: f64| {
        let w = (v * target.log_density(x)).exp();
        if w == 0.0 {
            return 0.0;
        }
        match inner(x) {
            Ok(i) => w * i,
            Err(e) => {
                failure.lock().expect("not poisoned").get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate_real_line(outer, &[], 0.0, sv, opts);
    if let Some(e) = failure.into_inner().expect("not poisoned") {
        return Err(e);
    }
    Ok((result?.value / zv).clamp(0.0, 1.0))
}

/// Monte Carlo estimate of `h̃(u, v)` and its standard error, from exact draws
/// of the tempered target.
pub fn h_tilde_mc(target: &dyn OracleTarget, u: f64, v: f64, samples: usize, rng: &mut StreamRng) -> Result<(f64, f64)> {
    check_exponent("u", u)?;
    check_exponent("v", v)?;
    if samples < 2 {
        return Err(Error::config("samples", "need at least two samples"));
    }
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let unsupported = || Error::config("target", format!("`{}` has no exact tempered sampler", target.name()));
        let x = target.sample_tempered(v, rng).ok_or_else(unsupported)?;
        let y = target.sample_tempered(u, rng).ok_or_else(unsupported)?;
        let p = ((v - u) * (target.log_density(y) - target.log_density(x))).min(0.0).exp();
        sum += p;
        sum_sq += p * p;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// The temperature parameters at which every adjacent pair has stationary
/// mean swap acceptance `α*`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub rho: Vec<f64>,
    pub betas: Vec<f64>,
    /// `h̃(β_{ℓ+1}, β_ℓ) − α*` at the returned ladder.
    pub residuals: Vec<f64>,
}

/// Root of `ρ ↦ h̃(v e^{−e^ρ}, v) − α*` on `bounds` by bisection to `tol`.
/// The function decreases in `ρ`.
fn solve_level(target: &dyn OracleTarget, v: f64, alpha_star: f64, bounds: RhoBounds, tol: f64, level: usize) -> Result<f64> {
    let g = |rho: f64| -> Result<f64> {
        let u = v * (-rho.exp()).exp();
        // exponent underflow: the hot level is flat and h̃ tends to zero
        if u == 0.0 || !u.is_normal() {
            return Ok(-alpha_star);
        }
        Ok(h_tilde(target, u, v)? - alpha_star)
    };
    let (mut lo, mut hi) = (bounds.lo, bounds.hi);
    let (g_lo, g_hi) = (g(lo)?, g(hi)?);
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::NoInteriorRoot { level, low: g_lo, high: g_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sequentially solves for `ρ̂⁽¹⁾, …, ρ̂⁽ᴸ⁻¹⁾`: level `ℓ` is solved given the
/// already fixed `β⁽ℓ⁾`, using monotonicity of `h̃(·, v)`.
///
/// Fails with [`Error::NoInteriorRoot`] (1-based level) when the bracket holds
/// no sign change.
pub fn fixed_point_rho(target: &dyn OracleTarget, levels: usize, alpha_star: f64, bounds: RhoBounds, tol: f64) -> Result<FixedPoint> {
    if levels < 2 {
        return Err(Error::config("levels", "need at least two levels"));
    }
    let mut rho = Vec::with_capacity(levels - 1);
    let mut betas = vec![1.0];
    let mut residuals = Vec::with_capacity(levels - 1);
    for level in 1..levels {
        let v = betas[level - 1];
        let r = solve_level(target, v, alpha_star, bounds, tol, level)?;
        let u = v * (-r.exp()).exp();
        residuals.push(h_tilde(target, u, v)? - alpha_star);
        rho.push(r);
        betas.push(u);
    }
    Ok(FixedPoint { rho, betas, residuals })
}

/// Swap acceptance probability between the states `x` (exponent `v`) and `y`
/// (exponent `u`); the integrand of `h̃`.
pub fn pair_acceptance(target: &dyn OracleTarget, x: f64, y: f64, u: f64, v: f64) -> f64 {
    swap_acceptance_with_delta(v - u, target.log_density(x), target.log_density(y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn normalizing_constants() {
        let o = QuadratureOptions::default();
        let z = normalizing_constant(&StandardNormalTarget, 0.25, o).unwrap();
        assert!((z - (2.0 * std::f64::consts::PI / 0.25).sqrt()).abs() < 1e-9);
        let z = normalizing_constant(&LaplaceTarget, 0.5, o).unwrap();
        assert!((z - 4.0).abs() < 1e-9);
        let z = normalizing_constant(&BimodalTarget::default(), 1.0, o).unwrap();
        assert!((z - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn limits_and_symmetry() {
        let t = StandardNormalTarget;
        assert_eq!(h_tilde(&t, 0.5, 0.5).unwrap(), 1.0);
        assert!(h_tilde(&t, 1e-6, 1.0).unwrap() < 0.01);
        assert!(h_tilde(&t, 0.999, 1.0).unwrap() > 0.99);
        let a = h_tilde(&t, 0.3, 0.9).unwrap();
        let b = h_tilde(&t, 0.9, 0.3).unwrap();
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn gaussian_depends_on_ratio_only() {
        let t = StandardNormalTarget;
        let a = h_tilde(&t, 0.25, 1.0).unwrap();
        let b = h_tilde(&t, 0.05, 0.2).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn mc_agrees_with_quadrature() {
        for t in [&StandardNormalTarget as &dyn OracleTarget, &LaplaceTarget] {
            let q = h_tilde(t, 0.4, 1.0).unwrap();
            let (m, se) = h_tilde_mc(t, 0.4, 1.0, 200_000, &mut stream(3, 0, 0)).unwrap();
            assert!((q - m).abs() < 5.0 * se, "{}: {q} vs {m} ± {se}", t.name());
        }
        assert!(h_tilde_mc(&BimodalTarget::default(), 0.4, 1.0, 10, &mut stream(3, 0, 0)).is_err());
    }

    #[test]
    fn invalid_exponents() {
        assert!(h_tilde(&StandardNormalTarget, 0.0, 1.0).is_err());
        assert!(h_tilde(&StandardNormalTarget, 0.5, 1.5).is_err());
    }

    #[test]
    fn alpha_star_near_one_has_no_interior_root() {
        let err = fixed_point_rho(&StandardNormalTarget, 2, 0.99999, RhoBounds::default(), 1e-6).unwrap_err();
        assert!(matches!(err, Error::NoInteriorRoot { level: 1, .. }));
    }
}
