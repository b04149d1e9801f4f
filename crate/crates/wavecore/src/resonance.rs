//! Non-resonance verification for a triple of carrier waves.
//!
//! Harmonics are labeled by signed carrier indices: `(1,-2)` is the
//! difference harmonic `e_1 conj(e_2)`, carrying wave vector `xi_1 - xi_2`
//! and frequency `omega_1 - omega_2`.  The quadratic index set `I` has nine
//! entries, the cubic set `K` nineteen; both are fixed catalogs below.
//!
//! A harmonic is non-resonant when its phase does not satisfy the dispersion
//! relation: the defect `omega_sum^2 - b(xi_sum) g0(xi_sum)` stays away from
//! zero.  The envelope coefficient solves divide by exactly this defect, so
//! the report doubles as the gate for the coefficient module.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dispersion::{bfun, g0, grad_g0, PhysicalParams, WaveComponent};
use crate::error::WaveError;
use crate::real;
use crate::Result;

/// The nine quadratic harmonic labels (j, i) with i possibly negated.
pub const PAIR_INDICES: [(i32, i32); 9] = [
    (1, 1),
    (2, 2),
    (3, 3),
    (1, 2),
    (1, -2),
    (1, 3),
    (1, -3),
    (2, 3),
    (2, -3),
];

/// The strictly ordered quadratic labels (j, i) with j < i.
pub const PAIR_INDICES_LT: [(i32, i32); 3] = [(1, 2), (1, 3), (2, 3)];

/// The nineteen cubic harmonic labels (j, i, k), signs as for pairs.
pub const TRIPLE_INDICES: [(i32, i32, i32); 19] = [
    (1, 1, 1),
    (2, 2, 2),
    (3, 3, 3),
    (1, 1, 2),
    (1, 1, -2),
    (1, 1, 3),
    (1, 1, -3),
    (2, 2, 3),
    (2, 2, -3),
    (2, 2, 1),
    (2, 2, -1),
    (3, 3, 1),
    (3, 3, -1),
    (3, 3, 2),
    (3, 3, -2),
    (1, 2, 3),
    (1, 2, -3),
    (1, 3, -2),
    (2, 3, -1),
];

/// Catalog entry for one higher harmonic: signed sums of the carrier data.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicEntry {
    pub xi: [f64; 2],
    pub omega: f64,
    pub b: f64,
    pub g: f64,
    pub grad_g: [f64; 2],
    /// `omega^2 - b g`, the resonance defect.
    pub defect: f64,
}

impl HarmonicEntry {
    pub fn xi_sq(&self) -> f64 {
        self.xi[0] * self.xi[0] + self.xi[1] * self.xi[1]
    }
}

/// Three carriers plus the derived harmonic catalog over `I` and `K`.
#[derive(Debug, Clone)]
pub struct WaveTriple {
    pub waves: [WaveComponent; 3],
    pub params: PhysicalParams,
    pairs: Vec<((i32, i32), HarmonicEntry)>,
    triples: Vec<((i32, i32, i32), HarmonicEntry)>,
}

fn signed(waves: &[WaveComponent; 3], idx: i32) -> ([f64; 2], f64) {
    let w = &waves[(idx.unsigned_abs() - 1) as usize];
    let s = if idx > 0 { 1.0 } else { -1.0 };
    ([s * w.xi[0], s * w.xi[1]], s * w.omega)
}

fn entry_for(xi: [f64; 2], omega: f64, p: &PhysicalParams) -> HarmonicEntry {
    let b = bfun(xi, p);
    let g = g0(xi, p);
    HarmonicEntry {
        xi,
        omega,
        b,
        g,
        grad_g: grad_g0(xi, p),
        defect: omega * omega - b * g,
    }
}

impl WaveTriple {
    /// Build the catalog; carriers must be pairwise distinct in (xi, omega).
    pub fn new(waves: [WaveComponent; 3], params: PhysicalParams) -> Result<WaveTriple> {
        for a in 0..3 {
            for b in (a + 1)..3 {
                let same = (waves[a].xi[0] - waves[b].xi[0]).abs() < 1e-12
                    && (waves[a].xi[1] - waves[b].xi[1]).abs() < 1e-12;
                if same {
                    return Err(WaveError::InvalidArgument(format!(
                        "carriers {} and {} coincide",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        let mut pairs = Vec::with_capacity(PAIR_INDICES.len());
        for &(j, i) in PAIR_INDICES.iter() {
            let (xj, oj) = signed(&waves, j);
            let (xi_, oi) = signed(&waves, i);
            pairs.push((
                (j, i),
                entry_for([xj[0] + xi_[0], xj[1] + xi_[1]], oj + oi, &params),
            ));
        }
        let mut triples = Vec::with_capacity(TRIPLE_INDICES.len());
        for &(j, i, k) in TRIPLE_INDICES.iter() {
            let (xj, oj) = signed(&waves, j);
            let (xi_, oi) = signed(&waves, i);
            let (xk, ok) = signed(&waves, k);
            triples.push((
                (j, i, k),
                entry_for(
                    [xj[0] + xi_[0] + xk[0], xj[1] + xi_[1] + xk[1]],
                    oj + oi + ok,
                    &params,
                ),
            ));
        }
        Ok(WaveTriple { waves, params, pairs, triples })
    }

    /// Convenience constructor from raw wave vectors.
    pub fn from_wavevectors(xis: [[f64; 2]; 3], params: PhysicalParams) -> Result<WaveTriple> {
        let w1 = WaveComponent::new(xis[0], &params)?;
        let w2 = WaveComponent::new(xis[1], &params)?;
        let w3 = WaveComponent::new(xis[2], &params)?;
        WaveTriple::new([w1, w2, w3], params)
    }

    pub fn pair(&self, label: (i32, i32)) -> &HarmonicEntry {
        &self
            .pairs
            .iter()
            .find(|(l, _)| *l == label)
            .expect("pair label not in catalog")
            .1
    }

    pub fn triple(&self, label: (i32, i32, i32)) -> &HarmonicEntry {
        &self
            .triples
            .iter()
            .find(|(l, _)| *l == label)
            .expect("triple label not in catalog")
            .1
    }

    pub fn pairs(&self) -> &[((i32, i32), HarmonicEntry)] {
        &self.pairs
    }

    pub fn triples(&self) -> &[((i32, i32, i32), HarmonicEntry)] {
        &self.triples
    }

    /// Carrier by 1-based index.
    pub fn wave(&self, j: i32) -> &WaveComponent {
        &self.waves[(j.unsigned_abs() - 1) as usize]
    }
}

/// Outcome for one harmonic in the non-resonance report.
#[derive(Debug, Clone)]
pub struct HarmonicCheck {
    pub label: String,
    pub defect: f64,
    /// Relative defect `|defect| / max(1, omega^2)`.
    pub rel_defect: f64,
    pub pass: bool,
}

/// A harmonic whose phase collides with a carrier or with another harmonic.
#[derive(Debug, Clone, PartialEq)]
pub enum Coincidence {
    /// A cubic harmonic equals a carrier phase: its sources must be routed
    /// into the corresponding envelope forcing.
    CubicWithCarrier { triple: (i32, i32, i32), carrier: i32 },
    /// Two quadratic harmonics share one phase: their sources are summed
    /// into a single representative.
    PairWithPair { first: (i32, i32), second: (i32, i32) },
    /// A quadratic harmonic equals a carrier phase (a genuine quadratic
    /// resonance; the defect check fails as well).
    PairWithCarrier { pair: (i32, i32), carrier: i32 },
}

/// Full non-resonance report over `I` and `K`.
#[derive(Debug, Clone)]
pub struct NonresonanceReport {
    pub quadratic: Vec<HarmonicCheck>,
    pub cubic: Vec<HarmonicCheck>,
    pub coincidences: Vec<Coincidence>,
}

impl NonresonanceReport {
    pub fn all_pass(&self) -> bool {
        self.quadratic.iter().chain(self.cubic.iter()).all(|c| c.pass)
    }

    pub fn min_rel_defect(&self) -> f64 {
        self.quadratic
            .iter()
            .chain(self.cubic.iter())
            .map(|c| c.rel_defect)
            .fold(f64::INFINITY, f64::min)
    }
}

fn phases_equal(a: ([f64; 2], f64), b: ([f64; 2], f64), tol: f64) -> bool {
    (a.0[0] - b.0[0]).abs() <= tol && (a.0[1] - b.0[1]).abs() <= tol && (a.1 - b.1).abs() <= tol
}

/// Check every harmonic of the catalog against the non-resonance tolerance
/// and collect phase coincidences (tolerance 1e-9 on phases).
pub fn check_nonresonance(triple: &WaveTriple, tol: f64) -> NonresonanceReport {
    let check = |label: String, e: &HarmonicEntry| {
        let rel = real::abs(e.defect) / f64::max(1.0, e.omega * e.omega);
        HarmonicCheck { label, pass: rel > tol, defect: e.defect, rel_defect: rel }
    };
    let quadratic = triple
        .pairs
        .iter()
        .map(|((j, i), e)| check(format!("({j},{i})"), e))
        .collect();
    let cubic = triple
        .triples
        .iter()
        .map(|((j, i, k), e)| check(format!("({j},{i},{k})"), e))
        .collect();

    let ptol = 1e-9;
    let mut coincidences = Vec::new();
    for (label, e) in triple.triples.iter() {
        for c in 1..=3 {
            let w = triple.wave(c);
            if phases_equal((e.xi, e.omega), (w.xi, w.omega), ptol) {
                coincidences.push(Coincidence::CubicWithCarrier { triple: *label, carrier: c });
            }
        }
    }
    for (a, (la, ea)) in triple.pairs.iter().enumerate() {
        for (lb, eb) in triple.pairs.iter().skip(a + 1) {
            if phases_equal((ea.xi, ea.omega), (eb.xi, eb.omega), ptol) {
                coincidences.push(Coincidence::PairWithPair { first: *la, second: *lb });
            }
        }
        for c in 1..=3 {
            let w = triple.wave(c);
            if phases_equal((ea.xi, ea.omega), (w.xi, w.omega), ptol) {
                coincidences.push(Coincidence::PairWithCarrier { pair: *la, carrier: c });
            }
        }
    }
    NonresonanceReport { quadratic, cubic, coincidences }
}

/// The gravity-wave resonance function.
///
/// For collinear gravity carriers with moduli `1` and `lambda` at relative
/// depth `x` and direction cosine `c`, quadratic resonance requires a root of
///
/// ```text
/// r0(x, lambda, c) = sqrt(s tanh(x s)) - sqrt(lambda tanh(x lambda)) - sqrt(tanh x)
/// s = sqrt(1 + lambda^2 + 2 c lambda)
/// ```
///
/// which is strictly negative for `lambda > 0`, and vanishes identically in
/// the degenerate limit `r0(x, 0, 1) = 0`.
pub fn r0(x: f64, lambda: f64, c: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(WaveError::InvalidArgument(String::from("x must be positive")));
    }
    if !(lambda >= 0.0) {
        return Err(WaveError::InvalidArgument(String::from("lambda must be nonnegative")));
    }
    if !(-1.0..=1.0).contains(&c) {
        return Err(WaveError::InvalidArgument(String::from("c must lie in [-1, 1]")));
    }
    let s = real::sqrt(1.0 + lambda * lambda + 2.0 * c * lambda);
    Ok(real::sqrt(s * real::tanh_clamped(x * s))
        - real::sqrt(lambda * real::tanh_clamped(x * lambda))
        - real::sqrt(real::tanh_clamped(x)))
}

/// One row of a resonance scan.
#[derive(Debug, Clone)]
pub struct ResonanceRow {
    pub mu: f64,
    pub inv_bond: f64,
    pub k: f64,
    pub order: u8,
    /// Self-interaction defect `(m omega(k))^2 - b(m k) g0(m k)`, m = order.
    pub defect: f64,
    /// Root refined by bisection when the defect changes sign at this k.
    pub refined_root: Option<f64>,
}

fn self_defect(k: f64, order: u8, p: &PhysicalParams) -> f64 {
    let m = order as f64;
    let w = m * crate::dispersion::omega([k, 0.0], p);
    let xi = [m * k, 0.0];
    w * w - bfun(xi, p) * g0(xi, p)
}

/// Scan the order-m self-interaction resonance defect over a parameter and
/// wavenumber grid; sign changes are refined by bisection.
pub fn scan_resonances(
    mus: &[f64],
    inv_bonds: &[f64],
    ks: &[f64],
    order: u8,
) -> Result<Vec<ResonanceRow>> {
    if order != 2 && order != 3 {
        return Err(WaveError::InvalidArgument(String::from("harmonic order must be 2 or 3")));
    }
    let mut rows = Vec::new();
    for &mu in mus {
        for &ib in inv_bonds {
            let p = PhysicalParams::new(mu, ib, 1.0, 1)?;
            let mut prev: Option<(f64, f64)> = None;
            for &k in ks {
                if k < 1e-8 {
                    continue;
                }
                let d = self_defect(k, order, &p);
                let mut refined = None;
                if let Some((kp, dp)) = prev {
                    if dp * d < 0.0 {
                        refined = Some(bisect(kp, k, |kk| self_defect(kk, order, &p)));
                    }
                }
                rows.push(ResonanceRow {
                    mu,
                    inv_bond: ib,
                    k,
                    order,
                    defect: d,
                    refined_root: refined,
                });
                prev = Some((k, d));
            }
        }
    }
    Ok(rows)
}

fn bisect(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < 1e-14 * b.abs().max(1.0) {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}
