//! Closed-form symbol pairs and test functions with exact cell averages.
//!
//! Every function here is a [`PiecewiseFunction`]: a list of segments, each
//! carrying a constant, an affine power `coef * u^e`, a power of a logarithm
//! `coef * ln(u)^k` (`u = slope * x + offset > 0`) or a smooth closure. Cell
//! averages come from antiderivatives; cells that are tiny relative to their
//! distance from the singularity switch to Gauss–Legendre to avoid
//! cancellation. Smooth closures always use Gauss–Legendre.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::conditions::SymbolPair;
use crate::error::{Error, Result};
use crate::grid::{gauss_mean, CellIntegrator, Domain, SampledFunction};
use crate::singular::{commutator_apply_at, operator_norm, KernelOperator, NormOptions};
use crate::young::YoungFunction;

type SmoothFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Piece {
    Const(f64),
    /// `coef * u^exp` with `u = slope * x + offset`, and `u >= u_floor`
    /// (zero below the floor).
    Pow {
        coef: f64,
        slope: f64,
        offset: f64,
        exp: f64,
        u_floor: f64,
    },
    /// `coef * ln(u)^power`, `power` 1 or 2, `u = slope * x + offset`.
    Log {
        coef: f64,
        slope: f64,
        offset: f64,
        power: u8,
    },
    Smooth(SmoothFn),
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::Const(c) => write!(f, "Const({c})"),
            Piece::Pow {
                coef,
                slope,
                offset,
                exp,
                ..
            } => write!(f, "Pow({coef} * ({slope} x + {offset})^{exp})"),
            Piece::Log {
                coef,
                slope,
                offset,
                power,
            } => write!(f, "Log({coef} * ln({slope} x + {offset})^{power})"),
            Piece::Smooth(_) => write!(f, "Smooth"),
        }
    }
}

impl Piece {
    pub fn pow(coef: f64, slope: f64, offset: f64, exp: f64) -> Self {
        Piece::Pow {
            coef,
            slope,
            offset,
            exp,
            u_floor: 0.0,
        }
    }

    pub fn smooth(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Piece::Smooth(Arc::new(f))
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            Piece::Const(c) => *c,
            Piece::Pow {
                coef,
                slope,
                offset,
                exp,
                u_floor,
            } => {
                let u = slope * x + offset;
                if u < *u_floor {
                    0.0
                } else {
                    coef * u.powf(*exp)
                }
            }
            Piece::Log {
                coef,
                slope,
                offset,
                power,
            } => coef * (slope * x + offset).ln().powi(*power as i32),
            Piece::Smooth(f) => f(x),
        }
    }

    /// `int_a^b piece(x) dx`.
    fn integral(&self, a: f64, b: f64) -> f64 {
        match self {
            Piece::Const(c) => c * (b - a),
            Piece::Pow {
                coef,
                slope,
                offset,
                exp,
                u_floor,
            } => {
                let (u0, u1) = ordered(slope * a + offset, slope * b + offset);
                let lo = u0.max(*u_floor);
                if u1 <= lo {
                    return 0.0;
                }
                coef * power_integral(lo, u1, *exp) / slope.abs()
            }
            Piece::Log {
                coef,
                slope,
                offset,
                power,
            } => {
                let (u0, u1) = ordered(slope * a + offset, slope * b + offset);
                coef * log_integral(u0, u1, *power) / slope.abs()
            }
            Piece::Smooth(f) => adaptive_integral(f.as_ref(), a, b),
        }
    }

    /// `int_a^b |piece(x)|^p dx` when a closed form exists.
    fn abs_pow_integral(&self, a: f64, b: f64, p: f64) -> Option<f64> {
        match self {
            Piece::Const(c) => Some(c.abs().powf(p) * (b - a)),
            Piece::Pow {
                coef,
                slope,
                offset,
                exp,
                u_floor,
            } => {
                let (u0, u1) = ordered(slope * a + offset, slope * b + offset);
                let lo = u0.max(*u_floor);
                if u1 <= lo {
                    return Some(0.0);
                }
                Some(coef.abs().powf(p) * power_integral(lo, u1, exp * p) / slope.abs())
            }
            Piece::Log { .. } | Piece::Smooth(_) => None,
        }
    }
}

fn ordered(a: f64, b: f64) -> (f64, f64) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Gauss–Legendre on `[a, b)`, bisected until halving changes each panel
/// by at most `1e-15` of the integral of `|f|` over the whole range (a
/// fixed absolute tolerance, so round-off cannot force deep recursion).
fn adaptive_integral(f: &(dyn Fn(f64) -> f64 + Send + Sync), a: f64, b: f64) -> f64 {
    let scale = gauss_mean(|x| f(x).abs(), a, b) * (b - a);
    adaptive_panel(f, a, b, 1e-15 * scale, 0)
}

fn adaptive_panel(f: &(dyn Fn(f64) -> f64 + Send + Sync), a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let whole = gauss_mean(f, a, b) * (b - a);
    let halves = gauss_mean(f, a, m) * (m - a) + gauss_mean(f, m, b) * (b - m);
    if depth >= 16 || (whole - halves).abs() <= tol {
        return halves;
    }
    adaptive_panel(f, a, m, tol, depth + 1) + adaptive_panel(f, m, b, tol, depth + 1)
}

/// `int_{u0}^{u1} u^e du` for `0 <= u0 < u1`.
fn power_integral(u0: f64, u1: f64, e: f64) -> f64 {
    if u0 > 0.0 && (u1 - u0) <= 0.01 * u0 {
        return gauss_mean(|u| u.powf(e), u0, u1) * (u1 - u0);
    }
    if e == -1.0 {
        return (u1 / u0).ln();
    }
    let k = e + 1.0;
    if u0 == 0.0 {
        return if k > 0.0 { u1.powf(k) / k } else { f64::INFINITY };
    }
    // u1^k - u0^k = u0^k expm1(k ln(u1/u0))
    u0.powf(k) * (k * ((u1 - u0) / u0).ln_1p()).exp_m1() / k
}

/// `int_{u0}^{u1} ln(u)^power du` for `0 <= u0 < u1`.
fn log_integral(u0: f64, u1: f64, power: u8) -> f64 {
    if u0 > 0.0 && (u1 - u0) <= 0.01 * u0 {
        return gauss_mean(|u| u.ln().powi(power as i32), u0, u1) * (u1 - u0);
    }
    let anti = |u: f64| -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let l = u.ln();
        match power {
            1 => u * l - u,
            _ => u * l * l - 2.0 * u * l + 2.0 * u,
        }
    };
    anti(u1) - anti(u0)
}

/// A real function given by disjoint segments `[a, b)`; zero elsewhere.
#[derive(Debug, Clone, Default)]
pub struct PiecewiseFunction {
    segments: Vec<(f64, f64, Piece)>,
}

impl PiecewiseFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, a: f64, b: f64, piece: Piece) -> Self {
        self.push(a, b, piece);
        self
    }

    pub fn push(&mut self, a: f64, b: f64, piece: Piece) {
        debug_assert!(a < b);
        self.segments.push((a, b, piece));
    }

    /// Pointwise value (zero outside every segment).
    pub fn eval(&self, x: f64) -> f64 {
        self.segments
            .iter()
            .find(|(a, b, _)| x >= *a && x < *b)
            .map_or(0.0, |(_, _, p)| p.eval(x))
    }

    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.segments
            .iter()
            .filter_map(|(sa, sb, p)| {
                let (lo, hi) = (a.max(*sa), b.min(*sb));
                (hi > lo).then(|| p.integral(lo, hi))
            })
            .sum()
    }

    pub fn sample(self: &Arc<Self>, domain: Domain) -> Result<SampledFunction> {
        SampledFunction::from_integrator(domain, self.clone())
    }
}

impl CellIntegrator for PiecewiseFunction {
    fn mean(&self, a: f64, b: f64) -> Complex64 {
        Complex64::new(self.integral(a, b) / (b - a), 0.0)
    }

    fn abs_pow_mean(&self, a: f64, b: f64, p: f64) -> Option<f64> {
        let mut acc = 0.0;
        for (sa, sb, piece) in &self.segments {
            let (lo, hi) = (a.max(*sa), b.min(*sb));
            if hi > lo {
                acc += piece.abs_pow_integral(lo, hi, p)?;
            }
        }
        Some(acc / (b - a))
    }
}

/// A named pair `(b1, b2)` with exact evaluators for `b1`, `b2` and `b1 b2`.
#[derive(Clone)]
pub struct GalleryPair {
    pub name: String,
    pub params: serde_json::Value,
    pub window_hint: [f64; 2],
    pub b1: Arc<PiecewiseFunction>,
    pub b2: Arc<PiecewiseFunction>,
    pub product: Arc<PiecewiseFunction>,
}

impl fmt::Debug for GalleryPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GalleryPair")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("window_hint", &self.window_hint)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairInfo {
    pub name: String,
    pub params: serde_json::Value,
    pub window_hint: [f64; 2],
}

impl GalleryPair {
    /// Exact cell averages of the pair on `domain`.
    pub fn sample(&self, domain: Domain) -> Result<SymbolPair> {
        SymbolPair::new(
            self.b1.sample(domain)?,
            self.b2.sample(domain)?,
            self.product.sample(domain)?,
            self.name.clone(),
        )
    }

    pub fn info(&self) -> PairInfo {
        PairInfo {
            name: self.name.clone(),
            params: self.params.clone(),
            window_hint: self.window_hint,
        }
    }
}

/// Names accepted by [`by_name`].
pub const PAIR_NAMES: &[&str] = &[
    "prop41",
    "nip1",
    "jnce1",
    "lastexample",
    "bmo_log",
    "constant",
    "smooth_random",
];

/// A gallery pair with default parameters (`seed` feeds `smooth_random`).
pub fn by_name(name: &str, seed: u64) -> Result<GalleryPair> {
    match name {
        "prop41" => make_prop41_pair(1.5, 3.0),
        "nip1" => make_nip1_pair(6, None),
        "jnce1" => Ok(make_jnce1_pair()),
        "lastexample" => make_lastexample_pair(),
        "bmo_log" | "log_pair" => Ok(make_bmo_pair(BmoKind::LogPair)),
        "constant" => Ok(make_bmo_pair(BmoKind::Constant)),
        "smooth_random" => Ok(make_bmo_pair(BmoKind::SmoothRandom(seed))),
        other => Err(Error::param(
            "pair",
            format!("unknown pair `{other}` (known: {})", PAIR_NAMES.join(", ")),
        )),
    }
}

fn arc(f: PiecewiseFunction) -> Arc<PiecewiseFunction> {
    Arc::new(f)
}

/// `b1 = x^(-a) 1_(0,1)`, `b2 = x^a 1_(0,1)` with `a = 2/(p+q)`; the product
/// is `1_(0,1)`. Both oscillation conditions of order `p` hold while order
/// `q` fails at the origin.
pub fn make_prop41_pair(p: f64, q: f64) -> Result<GalleryPair> {
    if !(1.0 < p && p < q && q.is_finite()) {
        return Err(Error::param("p, q", format!("need 1 < p < q < inf, got p={p}, q={q}")));
    }
    let a = 2.0 / (p + q);
    Ok(GalleryPair {
        name: "prop41".into(),
        params: serde_json::json!({ "p": p, "q": q, "exponent": a }),
        window_hint: [-2.0, 2.0],
        b1: arc(PiecewiseFunction::new().with(0.0, 1.0, Piece::pow(1.0, 1.0, 0.0, -a))),
        b2: arc(PiecewiseFunction::new().with(0.0, 1.0, Piece::pow(1.0, 1.0, 0.0, a))),
        product: arc(PiecewiseFunction::new().with(0.0, 1.0, Piece::Const(1.0))),
    })
}

/// `eta_k = 1/(2 + 1/k)`.
pub fn nip1_eta(k: u32) -> f64 {
    1.0 / (2.0 + 1.0 / k as f64)
}

/// `ln` of the inner cutoff `c^(6k) e^(-100 k^2)` of block `k`.
pub fn nip1_ln_cut(k: u32, c: f64) -> f64 {
    let k = k as f64;
    6.0 * k * c.ln() - 100.0 * k * k
}

/// Blocks `k = 2, 6, 10, ...` up to `k_max`.
pub fn nip1_blocks(k_max: u32) -> Vec<u32> {
    (2..=k_max).step_by(4).collect()
}

fn nip1_window(k_max: u32) -> f64 {
    ((k_max + 2) as f64).log2().ceil().exp2()
}

fn nip1_phi(w: f64) -> PiecewiseFunction {
    let mut phi = PiecewiseFunction::new();
    let mut k = -w as i64;
    while (k as f64) + 1.0 <= w {
        if k % 2 == 0 {
            phi.push(k as f64, k as f64 + 1.0, Piece::pow(1.0, 1.0, -(k as f64), 0.5));
        }
        k += 1;
    }
    phi
}

fn nip1_psi_block(k: u32, c: f64) -> Piece {
    Piece::Pow {
        coef: c,
        slope: 1.0,
        offset: -(k as f64),
        exp: -nip1_eta(k),
        // underflows to 0 for every k of interest; the cutoff is kept in
        // log form in the pair parameters
        u_floor: nip1_ln_cut(k, c).exp(),
    }
}

/// The pair `(b1, b2) = (psi, phi)`: `phi` repeats `x^(1/2)` on every even
/// unit interval, `psi` carries the blocks `c_k (x-k)^(-eta_k)` on
/// `(k, k+1)` for `k = 2 mod 4`. Without a schedule, each `c_k` is halved
/// from 1 until the block commutator norm on the reference grid is at most
/// `2^-k`.
pub fn make_nip1_pair(k_max: u32, c_schedule: Option<Vec<f64>>) -> Result<GalleryPair> {
    if k_max < 2 || k_max > 30 {
        return Err(Error::param("k_max", format!("need 2 <= k_max <= 30, got {k_max}")));
    }
    let blocks = nip1_blocks(k_max);
    let cs = match c_schedule {
        Some(cs) => {
            if cs.len() != blocks.len() {
                return Err(Error::param(
                    "c_schedule",
                    format!("{} values for blocks {blocks:?}", cs.len()),
                ));
            }
            if cs.iter().any(|&c| !(c > 0.0 && c.is_finite()))
                || cs.windows(2).any(|w| w[1] > w[0])
            {
                return Err(Error::param("c_schedule", "must be positive and non-increasing"));
            }
            cs
        }
        None => blocks
            .iter()
            .map(|&k| nip1_default_c(k))
            .collect::<Result<_>>()?,
    };
    let w = nip1_window(k_max);
    let phi = nip1_phi(w);
    let mut psi = PiecewiseFunction::new();
    let mut product = PiecewiseFunction::new();
    for (&k, &c) in blocks.iter().zip(&cs) {
        let kf = k as f64;
        psi.push(kf, kf + 1.0, nip1_psi_block(k, c));
        // c (x-k)^(-eta) (x-k)^(1/2)
        product.push(
            kf,
            kf + 1.0,
            Piece::Pow {
                coef: c,
                slope: 1.0,
                offset: -kf,
                exp: 0.5 - nip1_eta(k),
                u_floor: nip1_ln_cut(k, c).exp(),
            },
        );
    }
    let ln_cuts: Vec<f64> = blocks.iter().zip(&cs).map(|(&k, &c)| nip1_ln_cut(k, c)).collect();
    Ok(GalleryPair {
        name: "nip1".into(),
        params: serde_json::json!({
            "k_max": k_max,
            "blocks": blocks,
            "c_schedule": cs,
            "ln_cutoffs": ln_cuts,
        }),
        window_hint: [-w, w],
        b1: arc(psi),
        b2: arc(phi),
        product: arc(product),
    })
}

/// The single block `(psi_k, phi)` sampled on the reference grid
/// `[k-4, k+4)` with `n` cells.
pub fn nip1_block_pair(k: u32, c: f64, n: usize) -> Result<SymbolPair> {
    let kf = k as f64;
    let domain = Domain::new(kf - 4.0, kf + 4.0, n)?;
    let psi = arc(PiecewiseFunction::new().with(kf, kf + 1.0, nip1_psi_block(k, c)));
    let phi = arc(nip1_phi(nip1_window(k + 4)));
    let product = arc(PiecewiseFunction::new().with(
        kf,
        kf + 1.0,
        Piece::Pow {
            coef: c,
            slope: 1.0,
            offset: -kf,
            exp: 0.5 - nip1_eta(k),
            u_floor: nip1_ln_cut(k, c).exp(),
        },
    ));
    SymbolPair::new(
        psi.sample(domain)?,
        phi.sample(domain)?,
        product.sample(domain)?,
        format!("nip1 block {k}"),
    )
}

/// Cells of the reference grid used for the `c_k` schedule.
pub const NIP1_REFERENCE_CELLS: usize = 1024;

fn nip1_default_c(k: u32) -> Result<f64> {
    let target = 0.5f64.powi(k as i32);
    let norm = |c: f64| -> Result<f64> {
        let pair = nip1_block_pair(k, c, NIP1_REFERENCE_CELLS)?;
        let op = KernelOperator::quadrature(*pair.domain());
        Ok(operator_norm(&op, &pair, &NormOptions::default())?.value)
    };
    // the commutator is linear in c, so one measurement predicts the number
    // of halvings; each candidate is still measured before it is accepted
    let n1 = norm(1.0)?;
    let mut j = if n1 <= target {
        0
    } else {
        (n1 / target).log2().ceil() as i32
    };
    loop {
        let c = 0.5f64.powi(j);
        if norm(c)? <= target {
            return Ok(c);
        }
        j += 1;
        if j > 200 {
            return Err(Error::Precondition(format!("no c_k found for block {k}")));
        }
    }
}

/// `ln` of `c^(2+eps) int_{cut}^{2 cut} (x^(-eta) - m)^(2+eps) dx` with
/// `m = <x^(-eta)>_{(cut, 1)}`, a lower bound for the `(2+eps)`-oscillation
/// moment of block `k` over its unit interval. Requires `(2+eps) eta > 1`.
pub fn nip1_block_moment_ln(k: u32, c: f64, eps: f64) -> Result<f64> {
    let eta = nip1_eta(k);
    let r = (2.0 + eps) * eta;
    if r <= 1.0 {
        return Err(Error::param(
            "eps",
            format!("(2+eps) eta_k = {r} must exceed 1 for block {k}"),
        ));
    }
    let ln_cut = nip1_ln_cut(k, c);
    let m = 1.0 / (1.0 - eta);
    // on (cut, 2 cut): x^(-eta) - m >= (1 - m (2 cut)^eta) x^(-eta)
    let lead = 1.0 - m * (eta * (ln_cut + 2f64.ln())).exp();
    if lead <= 0.0 {
        return Err(Error::Precondition("cutoff too large for the bound".into()));
    }
    let shape = (1.0 - 2f64.powf(1.0 - r)) / (r - 1.0);
    Ok((2.0 + eps) * c.ln() + (2.0 + eps) * lead.ln() + (1.0 - r) * ln_cut + shape.ln())
}

/// `sigma = 1_[-1,1]` and `w = M(sigma)^(-1)`: `1` on `[-1,1]`,
/// `(1+|x|)/2` outside.
pub fn jnce1_weights() -> (PiecewiseFunction, PiecewiseFunction) {
    let sigma = PiecewiseFunction::new().with(-1.0, 1.0, Piece::Const(1.0));
    let w = PiecewiseFunction::new()
        .with(f64::NEG_INFINITY, -1.0, Piece::pow(1.0, -0.5, 0.5, 1.0))
        .with(-1.0, 1.0, Piece::Const(1.0))
        .with(1.0, f64::INFINITY, Piece::pow(1.0, 0.5, 0.5, 1.0));
    (sigma, w)
}

/// `M(1_[-1,1])(x)`: `1` on `[-1,1]`, `2/(1+|x|)` outside.
pub fn maximal_of_unit_indicator(x: f64) -> f64 {
    if x.abs() <= 1.0 {
        1.0
    } else {
        2.0 / (1.0 + x.abs())
    }
}

/// `b1 = sgn(x) 1_[-1,1]`, `b2 = sgn(x) M(1_[-1,1])^(-1/2)`; the product is
/// `1_[-1,1]`.
pub fn make_jnce1_pair() -> GalleryPair {
    let b1 = PiecewiseFunction::new()
        .with(-1.0, 0.0, Piece::Const(-1.0))
        .with(0.0, 1.0, Piece::Const(1.0));
    let b2 = PiecewiseFunction::new()
        .with(f64::NEG_INFINITY, -1.0, Piece::pow(-1.0, -0.5, 0.5, 0.5))
        .with(-1.0, 0.0, Piece::Const(-1.0))
        .with(0.0, 1.0, Piece::Const(1.0))
        .with(1.0, f64::INFINITY, Piece::pow(1.0, 0.5, 0.5, 0.5));
    let product = PiecewiseFunction::new().with(-1.0, 1.0, Piece::Const(1.0));
    GalleryPair {
        name: "jnce1".into(),
        params: serde_json::json!({}),
        window_hint: [-65536.0, 65536.0],
        b1: arc(b1),
        b2: arc(b2),
        product: arc(product),
    }
}

/// `b1 = sgn(x) 1_[-1,1]`, `b2 = sgn(x) Phi0^(-1)(M(1_[-1,1])^(-1))`; the
/// product is `Phi0^(-1)(1) 1_[-1,1]`.
pub fn make_lastexample_pair() -> Result<GalleryPair> {
    let phi0 = YoungFunction::Phi0;
    let inside = phi0.inverse(1.0)?;
    let outer = move |x: f64| -> f64 {
        YoungFunction::Phi0
            .inverse(0.5 * (1.0 + x.abs()))
            .expect("finite argument")
    };
    let b1 = PiecewiseFunction::new()
        .with(-1.0, 0.0, Piece::Const(-1.0))
        .with(0.0, 1.0, Piece::Const(1.0));
    let b2 = PiecewiseFunction::new()
        .with(f64::NEG_INFINITY, -1.0, Piece::smooth(move |x| -outer(x)))
        .with(-1.0, 0.0, Piece::Const(-inside))
        .with(0.0, 1.0, Piece::Const(inside))
        .with(1.0, f64::INFINITY, Piece::smooth(outer));
    let product = PiecewiseFunction::new().with(-1.0, 1.0, Piece::Const(inside));
    Ok(GalleryPair {
        name: "lastexample".into(),
        params: serde_json::json!({ "young": "phi0", "inner_value": inside }),
        window_hint: [-65536.0, 65536.0],
        b1: arc(b1),
        b2: arc(b2),
        product: arc(product),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmoKind {
    /// `b1 = b2 = ln|x|`.
    LogPair,
    Constant,
    /// Random trigonometric sums, seeded.
    SmoothRandom(u64),
}

pub fn make_bmo_pair(kind: BmoKind) -> GalleryPair {
    let window_hint = [-16.0, 16.0];
    match kind {
        BmoKind::LogPair => {
            let log = |power| {
                PiecewiseFunction::new()
                    .with(
                        f64::NEG_INFINITY,
                        0.0,
                        Piece::Log {
                            coef: 1.0,
                            slope: -1.0,
                            offset: 0.0,
                            power,
                        },
                    )
                    .with(
                        0.0,
                        f64::INFINITY,
                        Piece::Log {
                            coef: 1.0,
                            slope: 1.0,
                            offset: 0.0,
                            power,
                        },
                    )
            };
            GalleryPair {
                name: "bmo_log".into(),
                params: serde_json::json!({}),
                window_hint,
                b1: arc(log(1)),
                b2: arc(log(1)),
                product: arc(log(2)),
            }
        }
        BmoKind::Constant => {
            let c = |v| PiecewiseFunction::new().with(f64::NEG_INFINITY, f64::INFINITY, Piece::Const(v));
            GalleryPair {
                name: "constant".into(),
                params: serde_json::json!({ "b1": 1.5, "b2": -0.5 }),
                window_hint,
                b1: arc(c(1.5)),
                b2: arc(c(-0.5)),
                product: arc(c(-0.75)),
            }
        }
        BmoKind::SmoothRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut modes = || -> Vec<(f64, f64, f64)> {
                (0..4)
                    .map(|_| {
                        (
                            rng.gen_range(0.2..1.0),
                            rng.gen_range(0.25..3.0),
                            rng.gen_range(0.0..std::f64::consts::TAU),
                        )
                    })
                    .collect()
            };
            let m1 = Arc::new(modes());
            let m2 = Arc::new(modes());
            let eval = |m: &[(f64, f64, f64)], x: f64| -> f64 {
                m.iter().map(|(a, w, p)| a * (w * x + p).sin()).sum()
            };
            let whole = |f: SmoothFn| {
                arc(PiecewiseFunction::new().with(
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    Piece::Smooth(f),
                ))
            };
            let (a, b) = (m1.clone(), m2.clone());
            let (c, d) = (m1.clone(), m2.clone());
            GalleryPair {
                name: "smooth_random".into(),
                params: serde_json::json!({ "seed": seed }),
                window_hint,
                b1: whole(Arc::new(move |x| eval(&a, x))),
                b2: whole(Arc::new(move |x| eval(&b, x))),
                product: whole(Arc::new(move |x| eval(&c, x) * eval(&d, x))),
            }
        }
    }
}

/// A seeded random trigonometric sum plus a small offset, sampled at cell
/// midpoints: the generic smooth input of sparse and commutator runs.
pub fn random_smooth(domain: Domain, seed: u64) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..6.0),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    SampledFunction::from_midpoints(domain, |x| {
        let v: f64 = modes.iter().map(|(a, w, p)| a * (w * x + p).sin()).sum();
        Complex64::new(v + 0.1, 0.0)
    })
    .expect("midpoint samples are finite")
}

/// `x^(-1/2) (ln x)^(-1) 1_[100, r]`.
pub fn witness_f(r: f64) -> Result<Arc<PiecewiseFunction>> {
    if !(r > 100.0) {
        return Err(Error::param("R", format!("must exceed 100, got {r}")));
    }
    Ok(arc(PiecewiseFunction::new().with(
        100.0,
        r,
        Piece::smooth(|x| 1.0 / (x.sqrt() * x.ln())),
    )))
}

/// `x^(-1/q) 1_[100, r]`.
pub fn witness_power(q: f64, r: f64) -> Result<Arc<PiecewiseFunction>> {
    if !(r > 100.0) || !(q > 1.0) {
        return Err(Error::param("R, q", format!("need R > 100 and q > 1, got {r}, {q}")));
    }
    Ok(arc(PiecewiseFunction::new().with(100.0, r, Piece::pow(1.0, 1.0, 0.0, -1.0 / q))))
}

/// The window used for witness runs: `[-2^20, 2^20)` with unit cells.
pub fn witness_domain() -> Domain {
    Domain::new(-1048576.0, 1048576.0, 1 << 21).expect("valid window")
}

/// `L^2` norm on `[a, b)` of the commutator applied to `f`, evaluated by
/// direct sums at the cells of `[a, b)` only.
pub fn commutator_norm_on(
    op: &KernelOperator,
    pair: &SymbolPair,
    f: &SampledFunction,
    a: f64,
    b: f64,
) -> Result<f64> {
    let q = pair.domain().interval(a, b)?;
    let cells: Vec<usize> = q.cells().collect();
    let out = commutator_apply_at(op, pair, f, &cells)?;
    let h = pair.domain().cell_width();
    Ok((out.iter().map(|v| v.norm_sqr()).sum::<f64>() * h).sqrt())
}
