//! Envelope coefficient algebra for a three-carrier modulation ansatz.
//!
//! Starting from three leading-order envelopes `psi_0j`, a mean flow
//! `psi_00` and first-order corrections `psi_1j`, this module builds the
//! whole hierarchy of derived amplitudes: the polarized surface envelopes
//! `zeta_0j = i (omega_j / b_j) psi_0j`, the quadratic source terms feeding
//! the second-harmonic amplitudes, the cubic interaction tables, the forcing
//! terms driving the first-order corrections, and the second-order amplitude
//! corrections obtained from 2x2 solves against the resonance defects.
//!
//! Closure conventions are fixed throughout: `zeta_00 = 0` and
//! `psi_10 = psi_2j = psi_20 = 0`.
//!
//! Every product is computed on a padded grid (`mul_exact`), so band-limited
//! inputs yield alias-free coefficients.  Time derivatives of derived
//! quantities are carried analytically through the leading-order transport
//! equations (see [`Envelope`]); no finite differences appear anywhere.
//!
//! Harmonics whose phases collide are handled explicitly: coinciding
//! quadratic (or cubic) harmonics are merged into a single representative
//! with summed sources, and a cubic harmonic matching a carrier phase has
//! its sources routed into that carrier's cubic forcing slot.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::dispersion::WaveComponent;
use crate::error::WaveError;
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::resonance::{HarmonicEntry, WaveTriple, PAIR_INDICES, TRIPLE_INDICES};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn im(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

/// Directional derivative `v . grad f` (axes beyond the grid dimension are
/// ignored; carrier vectors in one dimension have a vanishing second entry).
pub fn dir_deriv(f: &SpectralField, v: [f64; 2]) -> SpectralField {
    let mut out = SpectralField::zeros(f.grid(), false);
    for axis in 0..f.grid().dim() {
        out.add_scaled(re(v[axis]), &f.deriv(axis)).unwrap();
    }
    out
}

/// Constant-coefficient second-order form `sum_ab h[a][b] d_a d_b f`.
pub fn hessian_form(f: &SpectralField, h: [[f64; 2]; 2]) -> SpectralField {
    let mut out = SpectralField::zeros(f.grid(), false);
    for a in 0..f.grid().dim() {
        for b in 0..f.grid().dim() {
            out.add_scaled(re(h[a][b]), &f.deriv(a).deriv(b)).unwrap();
        }
    }
    out
}

/// A field paired with its analytic time derivative, so products and
/// derivatives of envelope quantities propagate `d/dt'` by the product rule
/// instead of finite differences.
#[derive(Debug, Clone)]
pub struct Envelope {
    pub value: SpectralField,
    pub dt: SpectralField,
}

impl Envelope {
    pub fn new(value: SpectralField, dt: SpectralField) -> Envelope {
        debug_assert!(value.grid() == dt.grid());
        Envelope { value, dt }
    }

    /// A quantity with no explicit time dependence.
    pub fn steady(value: SpectralField) -> Envelope {
        let dt = SpectralField::zeros(value.grid(), false);
        Envelope { value, dt }
    }

    pub fn zeros(grid: &Grid) -> Envelope {
        Envelope::steady(SpectralField::zeros(grid, false))
    }

    /// An envelope advected at constant `velocity`: `dt = -velocity . grad`.
    pub fn transported(value: SpectralField, velocity: [f64; 2]) -> Envelope {
        let dt = dir_deriv(&value, velocity).neg();
        Envelope { value, dt }
    }

    pub fn grid(&self) -> &Grid {
        self.value.grid()
    }

    /// Product with the product rule applied to the time derivatives.
    pub fn mul(&self, o: &Envelope) -> Envelope {
        let value = self.value.mul_exact(&o.value).unwrap();
        let dt = self
            .dt
            .mul_exact(&o.value)
            .unwrap()
            .add(&self.value.mul_exact(&o.dt).unwrap())
            .unwrap();
        Envelope { value, dt }
    }

    pub fn conj(&self) -> Envelope {
        Envelope { value: self.value.conj_field(), dt: self.dt.conj_field() }
    }

    pub fn scale(&self, s: Complex64) -> Envelope {
        Envelope { value: self.value.scale(s), dt: self.dt.scale(s) }
    }

    pub fn add(&self, o: &Envelope) -> Envelope {
        Envelope {
            value: self.value.add(&o.value).unwrap(),
            dt: self.dt.add(&o.dt).unwrap(),
        }
    }

    pub fn add_scaled(&mut self, s: Complex64, o: &Envelope) {
        self.value.add_scaled(s, &o.value).unwrap();
        self.dt.add_scaled(s, &o.dt).unwrap();
    }

    pub fn dir_deriv(&self, v: [f64; 2]) -> Envelope {
        Envelope { value: dir_deriv(&self.value, v), dt: dir_deriv(&self.dt, v) }
    }
}

/// Leading-order polarization `zeta_0j = i (omega_j / b_j) psi_0j`.
pub fn polarize_leading(waves: &WaveTriple, psi0: &[SpectralField; 3]) -> [SpectralField; 3] {
    core::array::from_fn(|j| {
        let w = &waves.waves[j];
        psi0[j].scale(im(w.omega / w.b))
    })
}

/// First-order surface correction
/// `zeta_1j = i (omega_j / b_j) psi_1j + bo_velocity_j . grad psi_0j`.
pub fn zeta1j(psi1j: &SpectralField, psi0j: &SpectralField, wave: &WaveComponent) -> SpectralField {
    let mut out = psi1j.scale(im(wave.omega / wave.b));
    out.add_scaled(ONE, &dir_deriv(psi0j, wave.bo_velocity)).unwrap();
    out
}

/// Mean surface elevation `zeta_10 = -dt' psi_00 + B_0`.
pub fn zeta10(dt_psi00: &SpectralField, b0: &SpectralField) -> SpectralField {
    b0.sub(dt_psi00).unwrap()
}

/// Apply the resonance-defect inverse
/// `(zeta, psi) = 1/(omega^2 - b g) [[i omega, -g], [b, i omega]] (ra, rb)`.
pub fn solve_harmonic(
    entry: &HarmonicEntry,
    ra: &SpectralField,
    rb: &SpectralField,
) -> (SpectralField, SpectralField) {
    let det = entry.defect;
    let mut zeta = ra.scale(im(entry.omega / det));
    zeta.add_scaled(re(-entry.g / det), rb).unwrap();
    let mut psi = ra.scale(re(entry.b / det));
    psi.add_scaled(im(entry.omega / det), rb).unwrap();
    (zeta, psi)
}

fn solve_harmonic_env(entry: &HarmonicEntry, a: &Envelope, b: &Envelope) -> (Envelope, Envelope) {
    let (zv, pv) = solve_harmonic(entry, &a.value, &b.value);
    let (zd, pd) = solve_harmonic(entry, &a.dt, &b.dt);
    (Envelope::new(zv, zd), Envelope::new(pv, pd))
}

/// One quadratic harmonic: sources, first- and second-order amplitudes.
#[derive(Debug, Clone)]
pub struct PairBlock {
    pub label: (i32, i32),
    pub entry: HarmonicEntry,
    /// Catalog position of the representative when phases coincide; merged
    /// entries keep zero amplitudes so reconstructions count them once.
    pub merged_into: Option<usize>,
    pub a_src: Envelope,
    pub b_src: Envelope,
    pub zeta1: Envelope,
    pub psi1: Envelope,
    pub c_src: SpectralField,
    pub d_src: SpectralField,
    pub zeta2: SpectralField,
    pub psi2: SpectralField,
}

/// One cubic harmonic: sources and second-order amplitudes.
#[derive(Debug, Clone)]
pub struct TripleBlock {
    pub label: (i32, i32, i32),
    pub entry: HarmonicEntry,
    /// Signed carrier index whose forcing received these sources on a phase
    /// collision (negative when the conjugate phase matched).
    pub routed_to: Option<i32>,
    pub merged_into: Option<usize>,
    pub c_src: SpectralField,
    pub d_src: SpectralField,
    pub zeta2: SpectralField,
    pub psi2: SpectralField,
}

/// A scalar (one component) or horizontal-vector (two component) field.
pub type Slot = Vec<SpectralField>;

fn conj_slot(s: &Slot) -> Slot {
    s.iter().map(|f| f.conj_field()).collect()
}

/// Scalar x scalar, scalar x vector, or vector . vector contraction.
fn combine(c: &Slot, a: &Slot) -> Slot {
    match (c.len(), a.len()) {
        (1, 1) => vec![c[0].mul_exact(&a[0]).unwrap()],
        (1, 2) => vec![c[0].mul_exact(&a[0]).unwrap(), c[0].mul_exact(&a[1]).unwrap()],
        (2, 2) => vec![c[0]
            .mul_exact(&a[0])
            .unwrap()
            .add(&c[1].mul_exact(&a[1]).unwrap())
            .unwrap()],
        _ => unreachable!("unsupported slot contraction"),
    }
}

fn slot_add(acc: &mut Option<Slot>, s: Slot) {
    match acc {
        None => *acc = Some(s),
        Some(v) => {
            for (x, y) in v.iter_mut().zip(s.iter()) {
                x.add_scaled(ONE, y).unwrap();
            }
        }
    }
}

/// One factor pair of a cubic combination: a quadratic-harmonic block times a
/// leading-order amplitude, either possibly conjugated (`carrier < 0` takes
/// the conjugate amplitude).
#[derive(Debug, Clone, Copy)]
pub struct ComboTerm {
    pub pair: (i32, i32),
    pub conj_pair: bool,
    pub carrier: i32,
}

const fn t(pair: (i32, i32), conj_pair: bool, carrier: i32) -> ComboTerm {
    ComboTerm { pair, conj_pair, carrier }
}

/// Cubic combinations producing each carrier harmonic `e_j`.
pub const CARRIER_COMBOS: [&[ComboTerm]; 3] = [
    &[
        t((1, 1), false, -1),
        t((1, 2), false, -2),
        t((1, 3), false, -3),
        t((1, -2), false, 2),
        t((1, -3), false, 3),
    ],
    &[
        t((1, 2), false, -1),
        t((2, 2), false, -2),
        t((2, 3), false, -3),
        t((1, -2), true, 1),
        t((2, -3), false, 3),
    ],
    &[
        t((1, 3), false, -1),
        t((2, 3), false, -2),
        t((3, 3), false, -3),
        t((1, -3), true, 1),
        t((2, -3), true, 2),
    ],
];

/// Cubic combinations producing each cubic harmonic, aligned with
/// [`TRIPLE_INDICES`].
pub const TRIPLE_COMBOS: [&[ComboTerm]; 19] = [
    &[t((1, 1), false, 1)],
    &[t((2, 2), false, 2)],
    &[t((3, 3), false, 3)],
    &[t((1, 1), false, 2), t((1, 2), false, 1)],
    &[t((1, 1), false, -2), t((1, -2), false, 1)],
    &[t((1, 1), false, 3), t((1, 3), false, 1)],
    &[t((1, 1), false, -3), t((1, -3), false, 1)],
    &[t((2, 2), false, 3), t((2, 3), false, 2)],
    &[t((2, 2), false, -3), t((2, -3), false, 2)],
    &[t((2, 2), false, 1), t((1, 2), false, 2)],
    &[t((2, 2), false, -1), t((1, -2), true, 2)],
    &[t((3, 3), false, 1), t((1, 3), false, 3)],
    &[t((3, 3), false, -1), t((1, -3), true, 3)],
    &[t((3, 3), false, 2), t((2, 3), false, 3)],
    &[t((3, 3), false, -2), t((2, -3), true, 3)],
    &[t((2, 3), false, 1), t((1, 3), false, 2), t((1, 2), false, 3)],
    &[t((2, -3), false, 1), t((1, -3), false, 2), t((1, 2), false, -3)],
    &[t((2, -3), true, 1), t((1, 3), false, -2), t((1, -2), false, 3)],
    &[t((2, 3), false, -1), t((1, -3), true, 2), t((1, -2), true, 3)],
];

/// The per-harmonic building blocks of the cubic interaction terms.
#[derive(Debug, Clone)]
pub struct CoeffTables {
    /// Leading-amplitude factors `a_k^(n)`, indexed `[carrier][n-1]`.
    pub a: [[Slot; 11]; 3],
    /// Quadratic-block factors `c_{ji}^(n)`, aligned with [`PAIR_INDICES`].
    pub c: Vec<[Slot; 11]>,
    /// Auxiliary quadratic combinations, aligned with [`PAIR_INDICES`].
    pub gamma: Vec<[SpectralField; 4]>,
    /// Combined cubic slots targeting each carrier harmonic.
    pub d_carrier: [[Slot; 11]; 3],
    /// Combined cubic slots targeting each cubic harmonic.
    pub d_triple: Vec<[Slot; 11]>,
}

fn pair_pos(label: (i32, i32)) -> usize {
    PAIR_INDICES.iter().position(|&l| l == label).expect("pair label not in catalog")
}

/// Assemble the `a`, `c`, `gamma` factor tables and fold them into the
/// combined cubic slots via the fixed combination catalogs.
pub fn interaction_tables(
    waves: &WaveTriple,
    psi0: &[SpectralField; 3],
    zeta0: &[SpectralField; 3],
    pairs: &[PairBlock],
) -> CoeffTables {
    let a: [[Slot; 11]; 3] = core::array::from_fn(|k| {
        let w = &waves.waves[k];
        let xi_sq = w.xi_sq();
        let vec_of = |f: &SpectralField| vec![f.scale(im(w.xi[0])), f.scale(im(w.xi[1]))];
        [
            vec_of(&psi0[k]),
            vec![psi0[k].scale(re(w.g))],
            vec_of(&zeta0[k]),
            vec![psi0[k].scale(re(w.g))],
            vec![zeta0[k].clone()],
            vec_of(&psi0[k]),
            vec![psi0[k].scale(re(-xi_sq))],
            vec_of(&zeta0[k]),
            vec![zeta0[k].clone()],
            vec![psi0[k].scale(re(w.g))],
            vec![psi0[k].scale(re(-xi_sq))],
        ]
    });

    let mut gamma = Vec::with_capacity(pairs.len());
    let mut c = Vec::with_capacity(pairs.len());
    for block in pairs {
        let (j, i) = block.label;
        let e = &block.entry;
        let (ju, iu) = ((j - 1) as usize, (i.unsigned_abs() - 1) as usize);
        let wj = &waves.waves[ju];
        let wi = &waves.waves[iu];
        // A merged harmonic shares its representative's solved amplitude.
        let rep = block.merged_into.map_or(block, |r| &pairs[r]);
        let psi1 = &rep.psi1.value;
        let zeta1 = &rep.zeta1.value;
        let dot_ji = wj.xi[0] * wi.xi[0] + wj.xi[1] * wi.xi[1];

        let g = if j == i {
            let zp = zeta0[ju].mul_exact(&psi0[ju]).unwrap();
            let zz = zeta0[ju].mul_exact(&zeta0[ju]).unwrap();
            let mut g1 = psi1.scale(re(e.g));
            g1.add_scaled(re(wj.xi_sq() - e.g * wj.g), &zp).unwrap();
            [g1, zz.scale(re(0.5 * wj.xi_sq())), zp.scale(re(wj.g)), zz]
        } else if i > 0 {
            let zjpi = zeta0[ju].mul_exact(&psi0[iu]).unwrap();
            let zipj = zeta0[iu].mul_exact(&psi0[ju]).unwrap();
            let zz = zeta0[ju].mul_exact(&zeta0[iu]).unwrap();
            let mut g1 = psi1.scale(re(e.g));
            g1.add_scaled(re(wi.xi_sq() - e.g * wi.g), &zjpi).unwrap();
            g1.add_scaled(re(wj.xi_sq() - e.g * wj.g), &zipj).unwrap();
            let mut g3 = zjpi.scale(re(wi.g));
            g3.add_scaled(re(wj.g), &zipj).unwrap();
            [g1, zz.scale(re(dot_ji)), g3, zz.scale(re(2.0))]
        } else {
            let zjpi = zeta0[ju].mul_exact(&psi0[iu].conj_field()).unwrap();
            let zipj = zeta0[iu].conj_field().mul_exact(&psi0[ju]).unwrap();
            let zz = zeta0[ju].mul_exact(&zeta0[iu].conj_field()).unwrap();
            let mut g1 = psi1.scale(re(e.g));
            g1.add_scaled(re(wi.xi_sq() - e.g * wi.g), &zjpi).unwrap();
            g1.add_scaled(re(wj.xi_sq() - e.g * wj.g), &zipj).unwrap();
            let mut g3 = zjpi.scale(re(wi.g));
            g3.add_scaled(re(wj.g), &zipj).unwrap();
            [g1, zz.scale(re(-dot_ji)), g3, zz.scale(re(2.0))]
        };

        let vec_of = |f: &SpectralField| vec![f.scale(im(e.xi[0])), f.scale(im(e.xi[1]))];
        let mut c5 = psi1.scale(re(e.g));
        c5.add_scaled(re(-e.g), &g[2]).unwrap();
        c.push([
            vec_of(psi1),
            vec![g[0].clone()],
            vec![g[1].clone()],
            vec![zeta1.clone()],
            vec![c5],
            vec_of(zeta1),
            vec![zeta1.clone()],
            vec_of(psi1),
            vec![psi1.scale(re(-e.xi_sq()))],
            vec![g[3].clone()],
            vec![g[3].clone()],
        ]);
        gamma.push(g);
    }

    let fold = |terms: &[ComboTerm], n: usize| -> Slot {
        let mut acc: Option<Slot> = None;
        for term in terms {
            let cp = &c[pair_pos(term.pair)][n];
            let cs = if term.conj_pair { conj_slot(cp) } else { cp.clone() };
            let ap = &a[(term.carrier.unsigned_abs() - 1) as usize][n];
            let as_ = if term.carrier < 0 { conj_slot(ap) } else { ap.clone() };
            slot_add(&mut acc, combine(&cs, &as_));
        }
        acc.expect("combination catalog entries are never empty")
    };

    let d_carrier: [[Slot; 11]; 3] =
        core::array::from_fn(|j| core::array::from_fn(|n| fold(CARRIER_COMBOS[j], n)));
    let d_triple: Vec<[Slot; 11]> = TRIPLE_COMBOS
        .iter()
        .map(|terms| core::array::from_fn(|n| fold(terms, n)))
        .collect();

    CoeffTables { a, c, gamma, d_carrier, d_triple }
}

/// Cubic source terms from the combined slots: the pieces multiplied by the
/// harmonic's symbol data `(g, xi, 1/Bo)`.
fn cubic_cd(
    slots: &[Slot; 11],
    g: f64,
    xi: [f64; 2],
    xi_sq: f64,
    inv_bond: f64,
    grid: &Grid,
) -> (SpectralField, SpectralField) {
    // d-part: -d1 + d2 + (1/Bo) i xi . d3
    let mut d = slots[0][0].neg();
    d.add_scaled(ONE, &slots[1][0]).unwrap();
    d.add_scaled(im(inv_bond * xi[0]), &slots[2][0]).unwrap();
    d.add_scaled(im(inv_bond * xi[1]), &slots[2][1]).unwrap();
    // c-part: -g (d4 + d5) - (d6 + d7 + d8 + d9) - |xi|^2 d10 / 2 + g d11 / 2
    let mut c = SpectralField::zeros(grid, false);
    c.add_scaled(re(-g), &slots[3][0]).unwrap();
    c.add_scaled(re(-g), &slots[4][0]).unwrap();
    for n in 5..9 {
        c.add_scaled(re(-1.0), &slots[n][0]).unwrap();
    }
    c.add_scaled(re(-0.5 * xi_sq), &slots[9][0]).unwrap();
    c.add_scaled(re(0.5 * g), &slots[10][0]).unwrap();
    (c, d)
}

fn phases_equal(a: ([f64; 2], f64), b: ([f64; 2], f64)) -> bool {
    const TOL: f64 = 1e-9;
    (a.0[0] - b.0[0]).abs() <= TOL && (a.0[1] - b.0[1]).abs() <= TOL && (a.1 - b.1).abs() <= TOL
}

/// The complete derived-coefficient hierarchy at one macroscopic time.
#[derive(Debug, Clone)]
pub struct CoefficientSet {
    pub waves: WaveTriple,
    pub grid: Grid,
    pub psi0: [Envelope; 3],
    pub zeta0: [Envelope; 3],
    pub psi1: [Envelope; 3],
    pub zeta1: [Envelope; 3],
    pub psi00: Envelope,
    /// Second time derivative of the mean flow, from its wave equation.
    pub dt2_psi00: SpectralField,
    /// Right-hand side of the mean-flow wave equation.
    pub wave_source: SpectralField,
    pub b0: Envelope,
    pub zeta10: Envelope,
    pub pairs: Vec<PairBlock>,
    pub triples: Vec<TripleBlock>,
    pub tables: CoeffTables,
    /// Cubic sources `C_j`, `D_j` feeding the carrier harmonics (including
    /// any routed cubic-collision contributions).
    pub c_carrier: [SpectralField; 3],
    pub d_carrier: [SpectralField; 3],
    /// Transport forcing of the first-order corrections.
    pub e_forcing: [SpectralField; 3],
    pub f_j: [SpectralField; 3],
    pub zeta2: [SpectralField; 3],
    pub c0: SpectralField,
    pub d0: SpectralField,
    pub zeta20: SpectralField,
}

impl CoefficientSet {
    /// Build every derived coefficient from the free envelope data.
    ///
    /// `gate_tol` is the minimal admissible relative resonance defect of any
    /// solved harmonic; defects below it are a near-resonance error.
    pub fn compute(
        waves: &WaveTriple,
        psi0: &[SpectralField; 3],
        psi1: &[SpectralField; 3],
        psi00: &SpectralField,
        dt_psi00: &SpectralField,
        gate_tol: f64,
    ) -> Result<CoefficientSet> {
        let grid = psi0[0].grid().clone();
        for f in psi0.iter().chain(psi1.iter()) {
            if f.grid() != &grid {
                return Err(WaveError::GridMismatch);
            }
        }
        if psi00.grid() != &grid || dt_psi00.grid() != &grid {
            return Err(WaveError::GridMismatch);
        }
        if grid.dim() != waves.params.dim {
            return Err(WaveError::InvalidArgument(alloc::string::String::from(
                "grid dimension does not match the parameter dimension",
            )));
        }
        if grid.dim() == 1 {
            for w in waves.waves.iter() {
                if w.xi[1] != 0.0 {
                    return Err(WaveError::InvalidArgument(alloc::string::String::from(
                        "carriers on a one-dimensional grid need vanishing second components",
                    )));
                }
            }
        }
        let p = &waves.params;
        let inv_bond = p.inv_bond;

        // Leading order: transported envelopes and their polarizations.
        let psi0e: [Envelope; 3] = core::array::from_fn(|j| {
            Envelope::transported(psi0[j].clone(), waves.waves[j].group_velocity)
        });
        let zeta0e: [Envelope; 3] = core::array::from_fn(|j| {
            let w = &waves.waves[j];
            psi0e[j].scale(im(w.omega / w.b))
        });

        // Quadratic sources per harmonic.
        let mut pairs: Vec<PairBlock> = Vec::with_capacity(PAIR_INDICES.len());
        for &(j, i) in PAIR_INDICES.iter() {
            let entry = *waves.pair((j, i));
            let (ju, iu) = ((j - 1) as usize, (i.unsigned_abs() - 1) as usize);
            let wj = &waves.waves[ju];
            let wi = &waves.waves[iu];
            let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
            let (a_src, b_src) = if j == i {
                let a = zeta0e[ju]
                    .mul(&psi0e[ju])
                    .scale(re(-(entry.g * wj.g - 2.0 * wj.xi_sq())));
                let b = psi0e[ju]
                    .mul(&psi0e[ju])
                    .scale(re(0.5 * (wj.g * wj.g + wj.xi_sq())));
                (a, b)
            } else if i > 0 {
                let mut a = zeta0e[ju]
                    .mul(&psi0e[iu])
                    .scale(re(-(entry.g * wi.g - dot(entry.xi, wi.xi))));
                a.add_scaled(
                    re(-(entry.g * wj.g - dot(entry.xi, wj.xi))),
                    &zeta0e[iu].mul(&psi0e[ju]),
                );
                let b = psi0e[ju]
                    .mul(&psi0e[iu])
                    .scale(re(wj.g * wi.g + dot(wj.xi, wi.xi)));
                (a, b)
            } else {
                let mut a = zeta0e[ju]
                    .mul(&psi0e[iu].conj())
                    .scale(re(-(entry.g * wi.g + dot(entry.xi, wi.xi))));
                a.add_scaled(
                    re(-(entry.g * wj.g - dot(entry.xi, wj.xi))),
                    &zeta0e[iu].conj().mul(&psi0e[ju]),
                );
                let b = psi0e[ju]
                    .mul(&psi0e[iu].conj())
                    .scale(re(wj.g * wi.g - dot(wj.xi, wi.xi)));
                (a, b)
            };
            pairs.push(PairBlock {
                label: (j, i),
                entry,
                merged_into: None,
                a_src,
                b_src,
                zeta1: Envelope::zeros(&grid),
                psi1: Envelope::zeros(&grid),
                c_src: SpectralField::zeros(&grid, false),
                d_src: SpectralField::zeros(&grid, false),
                zeta2: SpectralField::zeros(&grid, false),
                psi2: SpectralField::zeros(&grid, false),
            });
        }

        // Merge coinciding quadratic phases into their first representative
        // and reject quadratic-carrier collisions.
        for a in 0..pairs.len() {
            if pairs[a].merged_into.is_some() {
                continue;
            }
            let pa = (pairs[a].entry.xi, pairs[a].entry.omega);
            for m in 1..=3i32 {
                let w = waves.wave(m);
                if phases_equal(pa, (w.xi, w.omega))
                    || phases_equal(pa, ([-w.xi[0], -w.xi[1]], -w.omega))
                {
                    return Err(WaveError::NearResonance {
                        label: format!("({},{})", pairs[a].label.0, pairs[a].label.1),
                        defect: 0.0,
                    });
                }
            }
            for b in (a + 1)..pairs.len() {
                if pairs[b].merged_into.is_some() {
                    continue;
                }
                if phases_equal(pa, (pairs[b].entry.xi, pairs[b].entry.omega)) {
                    pairs[b].merged_into = Some(a);
                    let (asrc, bsrc) = (pairs[b].a_src.clone(), pairs[b].b_src.clone());
                    pairs[a].a_src.add_scaled(ONE, &asrc);
                    pairs[a].b_src.add_scaled(ONE, &bsrc);
                }
            }
        }

        // Gate and solve the representatives.
        for block in pairs.iter_mut() {
            if block.merged_into.is_some() {
                continue;
            }
            let rel = block.entry.defect.abs()
                / f64::max(1.0, block.entry.omega * block.entry.omega);
            if rel <= gate_tol {
                return Err(WaveError::NearResonance {
                    label: format!("({},{})", block.label.0, block.label.1),
                    defect: rel,
                });
            }
            let (z, ps) = solve_harmonic_env(&block.entry, &block.a_src, &block.b_src);
            block.zeta1 = z;
            block.psi1 = ps;
        }

        // Mean-flow data.
        let mut b0 = Envelope::zeros(&grid);
        let mut wave_source = SpectralField::zeros(&grid, false);
        for j in 0..3 {
            let w = &waves.waves[j];
            let coef = w.g * w.g - w.xi_sq();
            let amp2 = psi0e[j].mul(&psi0e[j].conj());
            b0.add_scaled(re(coef), &amp2);
            wave_source.add_scaled(re(coef), &amp2.dt)?;
            wave_source
                .add_scaled(re(2.0 * w.omega / w.b), &dir_deriv(&amp2.value, w.xi))?;
        }
        let psi00e = Envelope::new(psi00.clone(), dt_psi00.clone());
        let mut dt2_psi00 = psi00.laplacian().scale(re(crate::real::sqrt(p.mu)));
        dt2_psi00.add_scaled(ONE, &wave_source)?;
        let zeta10e = Envelope::new(
            zeta10(dt_psi00, &b0.value),
            b0.dt.sub(&dt2_psi00).unwrap(),
        );

        // First-order carrier corrections at value level (time derivatives
        // follow once the forcing is known).
        let zeta1_values: [SpectralField; 3] =
            core::array::from_fn(|j| zeta1j(&psi1[j], &psi0[j], &waves.waves[j]));

        // Cubic tables and the carrier-targeted cubic sources.
        let zeta0_values: [SpectralField; 3] =
            core::array::from_fn(|j| zeta0e[j].value.clone());
        let tables = interaction_tables(waves, psi0, &zeta0_values, &pairs);

        let mut c_carrier: [SpectralField; 3] = core::array::from_fn(|_| {
            SpectralField::zeros(&grid, false)
        });
        let mut d_carrier: [SpectralField; 3] = core::array::from_fn(|_| {
            SpectralField::zeros(&grid, false)
        });
        // The directly cubic extras outside the combination slots.
        let mut xi2_zeta_psi = SpectralField::zeros(&grid, false);
        let mut xi2_zeta_sq = SpectralField::zeros(&grid, false);
        let mut zeta_sq = SpectralField::zeros(&grid, false);
        for i in 0..3 {
            let w = &waves.waves[i];
            let zp = zeta0_values[i].mul_exact(&psi0[i].conj_field())?;
            xi2_zeta_psi.add_scaled(re(w.xi_sq()), &zp)?;
            xi2_zeta_psi.add_scaled(re(w.xi_sq()), &zp.conj_field())?;
            let zz = zeta0_values[i].mul_exact(&zeta0_values[i].conj_field())?;
            xi2_zeta_sq.add_scaled(re(w.xi_sq()), &zz)?;
            zeta_sq.add_scaled(ONE, &zz)?;
        }
        for j in 0..3 {
            let w = &waves.waves[j];
            let (mut c, mut d) = cubic_cd(
                &tables.d_carrier[j],
                w.g,
                w.xi,
                w.xi_sq(),
                inv_bond,
                &grid,
            );
            d.add_scaled(re(w.g), &xi2_zeta_psi.mul_exact(&psi0[j])?)?;
            d.add_scaled(
                re(inv_bond * w.xi_sq()),
                &xi2_zeta_sq.mul_exact(&zeta0_values[j])?,
            )?;
            c.add_scaled(
                re(-2.0 * w.xi_sq() * w.g),
                &zeta_sq.mul_exact(&psi0[j])?,
            )?;
            c_carrier[j] = c;
            d_carrier[j] = d;
        }

        // Cubic harmonic sources, with merging and carrier routing.
        let mut triples: Vec<TripleBlock> = Vec::with_capacity(TRIPLE_INDICES.len());
        for (pos, &(j, i, k)) in TRIPLE_INDICES.iter().enumerate() {
            let entry = *waves.triple((j, i, k));
            let (c_src, d_src) = cubic_cd(
                &tables.d_triple[pos],
                entry.g,
                entry.xi,
                entry.xi_sq(),
                inv_bond,
                &grid,
            );
            triples.push(TripleBlock {
                label: (j, i, k),
                entry,
                routed_to: None,
                merged_into: None,
                c_src,
                d_src,
                zeta2: SpectralField::zeros(&grid, false),
                psi2: SpectralField::zeros(&grid, false),
            });
        }
        for a in 0..triples.len() {
            let pa = (triples[a].entry.xi, triples[a].entry.omega);
            if phases_equal(pa, ([0.0, 0.0], 0.0)) {
                return Err(WaveError::InvalidArgument(format!(
                    "cubic harmonic ({},{},{}) collapses onto the mean flow",
                    triples[a].label.0, triples[a].label.1, triples[a].label.2
                )));
            }
            let merged = (0..a).find(|&b| {
                triples[b].merged_into.is_none()
                    && phases_equal(pa, (triples[b].entry.xi, triples[b].entry.omega))
            });
            if let Some(b) = merged {
                triples[a].merged_into = Some(b);
                let (cs, ds) = (triples[a].c_src.clone(), triples[a].d_src.clone());
                triples[a].c_src = SpectralField::zeros(&grid, false);
                triples[a].d_src = SpectralField::zeros(&grid, false);
                triples[b].c_src.add_scaled(ONE, &cs)?;
                triples[b].d_src.add_scaled(ONE, &ds)?;
                continue;
            }
            for block in pairs.iter() {
                if phases_equal(pa, (block.entry.xi, block.entry.omega)) {
                    return Err(WaveError::InvalidArgument(format!(
                        "cubic harmonic ({},{},{}) shares a phase with harmonic ({},{})",
                        triples[a].label.0,
                        triples[a].label.1,
                        triples[a].label.2,
                        block.label.0,
                        block.label.1
                    )));
                }
            }
            for m in 1..=3i32 {
                let w = waves.wave(m);
                let routed = if phases_equal(pa, (w.xi, w.omega)) {
                    Some((m, false))
                } else if phases_equal(pa, ([-w.xi[0], -w.xi[1]], -w.omega)) {
                    Some((-m, true))
                } else {
                    None
                };
                if let Some((signed, conj)) = routed {
                    let mu_ = (m - 1) as usize;
                    let (cs, ds) = (triples[a].c_src.clone(), triples[a].d_src.clone());
                    if conj {
                        c_carrier[mu_].add_scaled(ONE, &cs.conj_field())?;
                        d_carrier[mu_].add_scaled(ONE, &ds.conj_field())?;
                    } else {
                        c_carrier[mu_].add_scaled(ONE, &cs)?;
                        d_carrier[mu_].add_scaled(ONE, &ds)?;
                    }
                    triples[a].routed_to = Some(signed);
                    triples[a].c_src = SpectralField::zeros(&grid, false);
                    triples[a].d_src = SpectralField::zeros(&grid, false);
                    break;
                }
            }
        }

        // Forcing of the first-order corrections and the closure fields.
        let mut e_forcing: [SpectralField; 3] = core::array::from_fn(|_| {
            SpectralField::zeros(&grid, false)
        });
        let mut f_j: [SpectralField; 3] = core::array::from_fn(|_| {
            SpectralField::zeros(&grid, false)
        });
        let mut zeta2: [SpectralField; 3] = core::array::from_fn(|_| {
            SpectralField::zeros(&grid, false)
        });
        for j in 0..3 {
            let w = &waves.waves[j];
            let coef = w.g * w.g - w.xi_sq();
            let b0psi = b0.value.mul_exact(&psi0[j])?;

            let mut e = hessian_form(&psi0[j], w.hessian_omega).scale(im(0.5));
            let mut mean = dt_psi00.scale(re(w.b / (2.0 * w.omega) * coef));
            mean.add_scaled(ONE, &dir_deriv(psi00, w.xi))?;
            e.add_scaled(im(-1.0), &psi0[j].mul_exact(&mean)?)?;
            e.add_scaled(im(w.b / (2.0 * w.omega) * coef), &b0psi)?;
            e.add_scaled(im(-w.b / (2.0 * w.omega)), &c_carrier[j])?;
            e.add_scaled(re(0.5), &d_carrier[j])?;
            e_forcing[j] = e;

            let mut f = hessian_form(&psi0[j], w.hessian_omega)
                .scale(im(-0.5 / w.b));
            let mut tension =
                dir_deriv(&dir_deriv(&psi0[j], w.bo_velocity), w.xi).scale(re(2.0));
            tension.add_scaled(re(w.omega / w.b), &psi0[j].laplacian())?;
            f.add_scaled(im(inv_bond / w.b), &tension)?;
            f.add_scaled(
                im(coef / (2.0 * w.omega)),
                &psi0[j].mul_exact(dt_psi00)?,
            )?;
            f.add_scaled(im(-coef / (2.0 * w.omega)), &b0psi)?;
            f.add_scaled(im(0.5 / w.omega), &c_carrier[j])?;
            f.add_scaled(re(0.5 / w.b), &d_carrier[j])?;
            f_j[j] = f;

            let mut z2 = dir_deriv(&psi1[j], w.bo_velocity);
            z2.add_scaled(ONE, &f_j[j])?;
            zeta2[j] = z2;
        }

        // Completed first-order carrier envelopes.
        let psi1e: [Envelope; 3] = core::array::from_fn(|j| {
            let w = &waves.waves[j];
            let mut dt = dir_deriv(&psi1[j], w.group_velocity).neg();
            dt.add_scaled(ONE, &e_forcing[j]).unwrap();
            Envelope::new(psi1[j].clone(), dt)
        });
        let zeta1e: [Envelope; 3] = core::array::from_fn(|j| {
            let w = &waves.waves[j];
            let mut dt = psi1e[j].dt.scale(im(w.omega / w.b));
            dt.add_scaled(ONE, &dir_deriv(&psi0e[j].dt, w.bo_velocity)).unwrap();
            Envelope::new(zeta1_values[j].clone(), dt)
        });

        // Mean-flow cubic sources and the second-order mean elevation.
        let mut d0_half = SpectralField::zeros(&grid, false);
        let mut c0_half = SpectralField::zeros(&grid, false);
        for j in 0..3 {
            let w = &waves.waves[j];
            let cpsi = psi0[j].conj_field();
            let v = [w.xi[0] - w.g * w.grad_g[0], w.xi[1] - w.g * w.grad_g[1]];
            d0_half.add_scaled(I, &cpsi.mul_exact(&dir_deriv(&psi0[j], v))?)?;
            d0_half.add_scaled(
                re(w.g * w.g - w.xi_sq()),
                &cpsi.mul_exact(&psi1[j])?,
            )?;
            c0_half.add_scaled(
                I,
                &dir_deriv(&zeta0_values[j].mul_exact(&cpsi)?, w.xi),
            )?;
        }
        let d0 = d0_half.add(&d0_half.conj_field())?;
        let c0 = c0_half.add(&c0_half.conj_field())?;
        let zeta20 = d0.clone();

        // Quadratic-harmonic cubic sources.
        for pos in 0..pairs.len() {
            let (j, i) = pairs[pos].label;
            let e = pairs[pos].entry;
            let (ju, iu) = ((j - 1) as usize, (i.unsigned_abs() - 1) as usize);
            let wj = waves.waves[ju];
            let wi = waves.waves[iu];
            let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
            let vadd = |u: [f64; 2], s: f64, v: [f64; 2]| [u[0] + s * v[0], u[1] + s * v[1]];
            let (c_src, d_src) = if j == i {
                let mut d = psi0[ju]
                    .mul_exact(&dir_deriv(&psi0[ju], vadd(wj.xi, wj.g, wj.grad_g)))?
                    .scale(im(-1.0));
                d.add_scaled(
                    re(wj.xi_sq() + wj.g * wj.g),
                    &psi0[ju].mul_exact(&psi1[ju])?,
                )?;
                let zp = zeta0_values[ju].mul_exact(&psi0[ju])?;
                let mut c = dir_deriv(&zp, vadd([-wj.xi[0], -wj.xi[1]], wj.g, e.grad_g))
                    .scale(I);
                c.add_scaled(
                    I,
                    &zeta0_values[ju].mul_exact(&dir_deriv(
                        &psi0[ju],
                        vadd([-2.0 * wj.xi[0], -2.0 * wj.xi[1]], e.g, wj.grad_g),
                    ))?,
                )?;
                let mut mixed = psi0[ju].mul_exact(&zeta1_values[ju])?;
                mixed.add_scaled(ONE, &zeta0_values[ju].mul_exact(&psi1[ju])?)?;
                c.add_scaled(re(-(wj.g * e.g - 2.0 * wj.xi_sq())), &mixed)?;
                (c, d)
            } else if i > 0 {
                let mut d = psi0[iu]
                    .mul_exact(&dir_deriv(&psi0[ju], vadd(wi.xi, wi.g, wj.grad_g)))?
                    .scale(im(-1.0));
                d.add_scaled(
                    im(-1.0),
                    &psi0[ju].mul_exact(&dir_deriv(&psi0[iu], vadd(wj.xi, wj.g, wi.grad_g)))?,
                )?;
                let mut mixed = psi0[iu].mul_exact(&psi1[ju])?;
                mixed.add_scaled(ONE, &psi0[ju].mul_exact(&psi1[iu])?)?;
                d.add_scaled(re(dot(wj.xi, wi.xi) + wj.g * wi.g), &mixed)?;

                let mut c = dir_deriv(
                    &zeta0_values[ju].mul_exact(&psi0[iu])?,
                    vadd([-wi.xi[0], -wi.xi[1]], wi.g, e.grad_g),
                )
                .scale(I);
                c.add_scaled(
                    I,
                    &dir_deriv(
                        &zeta0_values[iu].mul_exact(&psi0[ju])?,
                        vadd([-wj.xi[0], -wj.xi[1]], wj.g, e.grad_g),
                    ),
                )?;
                c.add_scaled(
                    I,
                    &zeta0_values[ju].mul_exact(&dir_deriv(
                        &psi0[iu],
                        vadd([-e.xi[0], -e.xi[1]], e.g, wi.grad_g),
                    ))?,
                )?;
                c.add_scaled(
                    I,
                    &zeta0_values[iu].mul_exact(&dir_deriv(
                        &psi0[ju],
                        vadd([-e.xi[0], -e.xi[1]], e.g, wj.grad_g),
                    ))?,
                )?;
                let mut mj = psi0[iu].mul_exact(&zeta1_values[ju])?;
                mj.add_scaled(ONE, &zeta0_values[ju].mul_exact(&psi1[iu])?)?;
                c.add_scaled(re(-(wi.g * e.g - dot(wi.xi, e.xi))), &mj)?;
                let mut mi = psi0[ju].mul_exact(&zeta1_values[iu])?;
                mi.add_scaled(ONE, &zeta0_values[iu].mul_exact(&psi1[ju])?)?;
                c.add_scaled(re(-(wj.g * e.g - dot(wj.xi, e.xi))), &mi)?;
                (c, d)
            } else {
                let cpsi = psi0[iu].conj_field();
                let cpsi1 = psi1[iu].conj_field();
                let czeta0 = zeta0_values[iu].conj_field();
                let czeta1 = zeta1_values[iu].conj_field();
                let mut d = cpsi
                    .mul_exact(&dir_deriv(&psi0[ju], vadd(wi.xi, -wi.g, wj.grad_g)))?
                    .scale(I);
                d.add_scaled(
                    im(-1.0),
                    &psi0[ju].mul_exact(&dir_deriv(&cpsi, vadd(wj.xi, -wj.g, wi.grad_g)))?,
                )?;
                let mut mixed = cpsi.mul_exact(&psi1[ju])?;
                mixed.add_scaled(ONE, &psi0[ju].mul_exact(&cpsi1)?)?;
                d.add_scaled(re(wj.g * wi.g - dot(wj.xi, wi.xi)), &mixed)?;

                let mut c = dir_deriv(
                    &zeta0_values[ju].mul_exact(&cpsi)?,
                    vadd(wi.xi, wi.g, e.grad_g),
                )
                .scale(I);
                c.add_scaled(
                    I,
                    &dir_deriv(
                        &czeta0.mul_exact(&psi0[ju])?,
                        vadd([-wj.xi[0], -wj.xi[1]], wj.g, e.grad_g),
                    ),
                )?;
                c.add_scaled(
                    im(-1.0),
                    &zeta0_values[ju].mul_exact(&dir_deriv(
                        &cpsi,
                        vadd(e.xi, e.g, wi.grad_g),
                    ))?,
                )?;
                c.add_scaled(
                    I,
                    &czeta0.mul_exact(&dir_deriv(
                        &psi0[ju],
                        vadd([-e.xi[0], -e.xi[1]], e.g, wj.grad_g),
                    ))?,
                )?;
                let mut mj = cpsi.mul_exact(&zeta1_values[ju])?;
                mj.add_scaled(ONE, &zeta0_values[ju].mul_exact(&cpsi1)?)?;
                c.add_scaled(re(-(wi.g * e.g + dot(wi.xi, e.xi))), &mj)?;
                let mut mi = psi0[ju].mul_exact(&czeta1)?;
                mi.add_scaled(ONE, &czeta0.mul_exact(&psi1[ju])?)?;
                c.add_scaled(re(-(wj.g * e.g - dot(wj.xi, e.xi))), &mi)?;
                (c, d)
            };
            pairs[pos].c_src = c_src;
            pairs[pos].d_src = d_src;
        }
        // Merge the cubic sources exactly as the quadratic ones.
        for a in 0..pairs.len() {
            if let Some(rep) = pairs[a].merged_into {
                let (cs, ds) = (pairs[a].c_src.clone(), pairs[a].d_src.clone());
                pairs[a].c_src = SpectralField::zeros(&grid, false);
                pairs[a].d_src = SpectralField::zeros(&grid, false);
                pairs[rep].c_src.add_scaled(ONE, &cs)?;
                pairs[rep].d_src.add_scaled(ONE, &ds)?;
            }
        }

        // Second-order quadratic amplitudes.
        for block in pairs.iter_mut() {
            if block.merged_into.is_some() {
                continue;
            }
            let e = block.entry;
            let mut ra = block.c_src.sub(&block.zeta1.dt)?;
            ra.add_scaled(im(-1.0), &dir_deriv(&block.psi1.value, e.grad_g))?;
            let mut rb = block.d_src.sub(&block.psi1.dt)?;
            rb.add_scaled(im(2.0 * inv_bond), &dir_deriv(&block.zeta1.value, e.xi))?;
            let (z2, p2) = solve_harmonic(&e, &ra, &rb);
            block.zeta2 = z2;
            block.psi2 = p2;
        }

        // Second-order cubic amplitudes (representatives, not routed).
        for block in triples.iter_mut() {
            if block.merged_into.is_some() || block.routed_to.is_some() {
                continue;
            }
            let rel = block.entry.defect.abs()
                / f64::max(1.0, block.entry.omega * block.entry.omega);
            if rel <= gate_tol {
                return Err(WaveError::NearResonance {
                    label: format!(
                        "({},{},{})",
                        block.label.0, block.label.1, block.label.2
                    ),
                    defect: rel,
                });
            }
            let (z2, p2) = solve_harmonic(&block.entry, &block.c_src, &block.d_src);
            block.zeta2 = z2;
            block.psi2 = p2;
        }

        Ok(CoefficientSet {
            waves: waves.clone(),
            grid,
            psi0: psi0e,
            zeta0: zeta0e,
            psi1: psi1e,
            zeta1: zeta1e,
            psi00: psi00e,
            dt2_psi00,
            wave_source,
            b0,
            zeta10: zeta10e,
            pairs,
            triples,
            tables,
            c_carrier,
            d_carrier,
            e_forcing,
            f_j,
            zeta2,
            c0,
            d0,
            zeta20,
        })
    }

    /// The carrier-harmonic second-order source of the elevation expansion:
    /// `P_j = (H_j + (g_j^2 - |xi_j|^2) zeta_10) psi_0j
    ///        + i zeta_0j xi_j . grad psi_00 - C_j`
    /// with `H_j` half the divergence form of the dispersion Hessian.
    pub fn p_forcing(&self, j: usize) -> SpectralField {
        let w = &self.waves.waves[j];
        let hg = crate::dispersion::hessian_g0(w.xi, &self.waves.params);
        let mut p = hessian_form(&self.psi0[j].value, hg).scale(re(0.5));
        p.add_scaled(
            re(w.g * w.g - w.xi_sq()),
            &self.zeta10.value.mul_exact(&self.psi0[j].value).unwrap(),
        )
        .unwrap();
        p.add_scaled(
            I,
            &self
                .zeta0[j]
                .value
                .mul_exact(&dir_deriv(&self.psi00.value, w.xi))
                .unwrap(),
        )
        .unwrap();
        p.add_scaled(re(-1.0), &self.c_carrier[j]).unwrap();
        p
    }

    /// The carrier-harmonic second-order source of the potential expansion:
    /// `Q_j = -(1/Bo) lap zeta_0j + i psi_0j xi_j . grad psi_00 - D_j`.
    pub fn q_forcing(&self, j: usize) -> SpectralField {
        let w = &self.waves.waves[j];
        let mut q = self.zeta0[j]
            .value
            .laplacian()
            .scale(re(-self.waves.params.inv_bond));
        q.add_scaled(
            I,
            &self
                .psi0[j]
                .value
                .mul_exact(&dir_deriv(&self.psi00.value, w.xi))
                .unwrap(),
        )
        .unwrap();
        q.add_scaled(re(-1.0), &self.d_carrier[j]).unwrap();
        q
    }
}
