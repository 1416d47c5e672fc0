//! Mark space, intensity measure and jump coefficient.
//!
//! The intensity is restricted to finite total mass so the driving random
//! measure is exactly samplable; sigma-finite intensities must be truncated
//! to a compact mark set by the caller. Checkers for the structural noise
//! conditions live here: linear growth and Lipschitz majorants, their
//! integrability in L_q of the product intensity, and membership in the
//! exponential-integrability classes.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{simpson, SIMPSON_PANELS};
use crate::report::ConditionReport;
use crate::scalar::Scalar;
use crate::triple::{HVector, TripleSpec};

/// A point of the mark space: an atom index or a real location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mark<S> {
    Atom(usize),
    Point(S),
}

/// One atom of a purely discrete intensity.
#[derive(Debug, Clone, Copy)]
pub struct Atom<S> {
    /// Location of the mark (carried through to the jump coefficient).
    pub value: S,
    /// Mass of the atom; strictly positive.
    pub mass: S,
}

/// Mark space with a finite intensity measure.
#[derive(Clone)]
pub enum MarkSpace<S> {
    /// ν = Σ mass_i δ_{z_i}.
    Atoms(Vec<Atom<S>>),
    /// ν(dz) = pdf(z) dz on a bounded interval; pdf need not be normalized.
    Density {
        lo: S,
        hi: S,
        pdf: Arc<dyn Fn(S) -> S + Send + Sync>,
    },
}

impl<S: Scalar> std::fmt::Debug for MarkSpace<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MarkSpace::Atoms(atoms) => f.debug_tuple("Atoms").field(&atoms.len()).finish(),
            MarkSpace::Density { lo, hi, .. } => f
                .debug_struct("Density")
                .field("lo", lo)
                .field("hi", hi)
                .finish(),
        }
    }
}

impl<S: Scalar> MarkSpace<S> {
    pub fn atoms(pairs: &[(S, S)]) -> Result<Self> {
        let atoms: Vec<Atom<S>> = pairs
            .iter()
            .map(|&(value, mass)| Atom { value, mass })
            .collect();
        let space = MarkSpace::Atoms(atoms);
        space.validate()?;
        Ok(space)
    }

    pub fn single_atom(value: S, mass: S) -> Result<Self> {
        Self::atoms(&[(value, mass)])
    }

    pub fn density(lo: S, hi: S, pdf: impl Fn(S) -> S + Send + Sync + 'static) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid("density support must have lo < hi"));
        }
        let space = MarkSpace::Density {
            lo,
            hi,
            pdf: Arc::new(pdf),
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        match self {
            MarkSpace::Atoms(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::invalid("mark space needs at least one atom"));
                }
                for a in atoms {
                    if !(a.mass > S::zero()) || !a.mass.is_finite() {
                        return Err(Error::invalid("atom masses must be strictly positive"));
                    }
                }
                Ok(())
            }
            MarkSpace::Density { .. } => {
                let total = self.total_mass();
                if !(total > S::zero()) || !total.is_finite() {
                    return Err(Error::invalid(
                        "density must have finite, strictly positive total mass",
                    ));
                }
                Ok(())
            }
        }
    }

    /// Total intensity mass ν(X); atom sum or Simpson quadrature.
    pub fn total_mass(&self) -> S {
        match self {
            MarkSpace::Atoms(atoms) => atoms.iter().map(|a| a.mass).sum(),
            MarkSpace::Density { lo, hi, pdf } => {
                simpson(|z| pdf(z), *lo, *hi, SIMPSON_PANELS)
            }
        }
    }

    /// Number of atoms, or `None` for a density space.
    pub fn atom_count(&self) -> Option<usize> {
        match self {
            MarkSpace::Atoms(atoms) => Some(atoms.len()),
            MarkSpace::Density { .. } => None,
        }
    }

    /// Integral ∫ w(z) ν(dz) of a scalar observable.
    pub fn integrate(&self, w: impl Fn(&Mark<S>) -> S) -> S {
        match self {
            MarkSpace::Atoms(atoms) => atoms
                .iter()
                .enumerate()
                .map(|(i, a)| w(&Mark::Atom(i)) * a.mass)
                .sum(),
            MarkSpace::Density { lo, hi, pdf } => {
                simpson(|z| w(&Mark::Point(z)) * pdf(z), *lo, *hi, SIMPSON_PANELS)
            }
        }
    }

    /// Real-valued location of a mark.
    pub fn location(&self, mark: &Mark<S>) -> S {
        match (self, mark) {
            (MarkSpace::Atoms(atoms), Mark::Atom(i)) => atoms[*i].value,
            (_, Mark::Point(z)) => *z,
            (MarkSpace::Density { .. }, Mark::Atom(_)) => {
                panic!("atom mark used with a density mark space")
            }
        }
    }

    /// Draw one mark from ν / ν(X).
    pub fn sample_mark<R: Rng>(&self, rng: &mut R) -> Mark<S> {
        match self {
            MarkSpace::Atoms(atoms) => {
                let total = self.total_mass();
                let u: S = rng.random_range(S::zero()..total);
                let mut acc = S::zero();
                for (i, a) in atoms.iter().enumerate() {
                    acc = acc + a.mass;
                    if u < acc {
                        return Mark::Atom(i);
                    }
                }
                Mark::Atom(atoms.len() - 1)
            }
            MarkSpace::Density { lo, hi, pdf } => {
                // Rejection from a uniform envelope; sup estimated on the
                // quadrature grid with a safety factor.
                let mut sup = S::zero();
                let n = 256;
                for i in 0..=n {
                    let z = *lo + (*hi - *lo) * S::of_usize(i) / S::of_usize(n);
                    sup = sup.max(pdf(z));
                }
                let bound = sup * S::of(1.05);
                loop {
                    let z: S = rng.random_range(*lo..*hi);
                    let u: S = rng.random_range(S::zero()..bound);
                    if u <= pdf(z) {
                        return Mark::Point(z);
                    }
                }
            }
        }
    }

    /// Number of control cells that partition this mark space by default:
    /// one per atom, or a single cell for a density space.
    pub fn default_cells(&self) -> usize {
        self.atom_count().unwrap_or(1)
    }

    /// Cell index of a mark under a partition into `cells` cells.
    ///
    /// Atoms are split into contiguous index blocks; a density interval is
    /// split into equal subintervals.
    pub fn mark_cell(&self, mark: &Mark<S>, cells: usize) -> usize {
        match (self, mark) {
            (MarkSpace::Atoms(atoms), Mark::Atom(i)) => {
                (i * cells / atoms.len()).min(cells - 1)
            }
            (MarkSpace::Density { lo, hi, .. }, Mark::Point(z)) => {
                let frac = ((*z - *lo) / (*hi - *lo)).max(S::zero());
                let idx = (frac * S::of_usize(cells)).floor().as_f64() as usize;
                idx.min(cells - 1)
            }
            _ => panic!("mark kind does not match mark space"),
        }
    }

    /// ν-mass of cell `j` under a partition into `cells` cells.
    pub fn cell_mass(&self, j: usize, cells: usize) -> S {
        match self {
            MarkSpace::Atoms(atoms) => atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| (i * cells / atoms.len()).min(cells - 1) == j)
                .map(|(_, a)| a.mass)
                .sum(),
            MarkSpace::Density { lo, hi, pdf } => {
                let width = (*hi - *lo) / S::of_usize(cells);
                let a = *lo + width * S::of_usize(j);
                simpson(|z| pdf(z), a, a + width, SIMPSON_PANELS)
            }
        }
    }
}

/// Total intensity mass ν(X).
pub fn nu_total<S: Scalar>(marks: &MarkSpace<S>) -> S {
    marks.total_mass()
}

type CoeffFn<S> = dyn Fn(S, &HVector<S>, &Mark<S>) -> HVector<S> + Send + Sync;
type MajorantFn<S> = dyn Fn(S, &Mark<S>) -> S + Send + Sync;
type JacobianFn<S> = dyn Fn(S, &HVector<S>, &Mark<S>) -> Vec<Vec<S>> + Send + Sync;

/// Jump coefficient f(t, v, z) with its growth and Lipschitz majorants and
/// the exponential-integrability exponents.
#[derive(Clone)]
pub struct NoiseModel<S> {
    pub marks: MarkSpace<S>,
    coeff: Arc<CoeffFn<S>>,
    l_f: Arc<MajorantFn<S>>,
    g_f: Arc<MajorantFn<S>>,
    /// Jacobian of v ↦ f(t, v, z), rows = output components. `None` falls
    /// back to central finite differences where a Jacobian is needed.
    coeff_jacobian: Option<Arc<JacobianFn<S>>>,
    pub eta0: S,
    pub p_exponent: S,
    /// Set for the canonical no-noise model: lets solvers skip jump-grid
    /// refinement so the no-noise reduction is bit-exact.
    trivial: bool,
}

impl<S: Scalar> std::fmt::Debug for NoiseModel<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseModel")
            .field("marks", &self.marks)
            .field("eta0", &self.eta0)
            .field("p_exponent", &self.p_exponent)
            .field("trivial", &self.trivial)
            .finish()
    }
}

/// The exponent floor for the growth majorant:
/// max(2β(α−1)(α+η₀)/α, 4(α−1)(α+η₀)/α, 4, β+2).
pub fn upsilon<S: Scalar>(alpha: S, beta: S, eta0: S) -> S {
    let two = S::of(2.0);
    let four = S::of(4.0);
    let a = two * beta * (alpha - S::one()) * (alpha + eta0) / alpha;
    let b = four * (alpha - S::one()) * (alpha + eta0) / alpha;
    a.max(b).max(four).max(beta + two)
}

impl<S: Scalar> NoiseModel<S> {
    pub fn new(
        marks: MarkSpace<S>,
        coeff: impl Fn(S, &HVector<S>, &Mark<S>) -> HVector<S> + Send + Sync + 'static,
        l_f: impl Fn(S, &Mark<S>) -> S + Send + Sync + 'static,
        g_f: impl Fn(S, &Mark<S>) -> S + Send + Sync + 'static,
        eta0: S,
        p_exponent: S,
    ) -> Result<Self> {
        if !(eta0 > S::zero()) {
            return Err(Error::invalid("eta0 must be strictly positive"));
        }
        Ok(NoiseModel {
            marks,
            coeff: Arc::new(coeff),
            l_f: Arc::new(l_f),
            g_f: Arc::new(g_f),
            coeff_jacobian: None,
            eta0,
            p_exponent,
            trivial: false,
        })
    }

    /// Attach an analytic Jacobian of v ↦ f(t, v, z).
    pub fn with_jacobian(
        mut self,
        jac: impl Fn(S, &HVector<S>, &Mark<S>) -> Vec<Vec<S>> + Send + Sync + 'static,
    ) -> Self {
        self.coeff_jacobian = Some(Arc::new(jac));
        self
    }

    /// The canonical no-noise model: f ≡ 0.
    pub fn zero(marks: MarkSpace<S>) -> Self {
        let mut m = NoiseModel::new(
            marks,
            |_t, v: &HVector<S>, _z| HVector::zeros(v.dim()),
            |_t, _z| S::zero(),
            |_t, _z| S::zero(),
            S::one(),
            S::of(8.0),
        )
        .expect("zero model is always valid");
        m.trivial = true;
        let dim_jac = |_t: S, v: &HVector<S>, _z: &Mark<S>| {
            vec![vec![S::zero(); v.dim()]; v.dim()]
        };
        m.coeff_jacobian = Some(Arc::new(dim_jac));
        m
    }

    /// Multiplicative noise f(t, v, z) = σ(z)·v with L_f = G_f = |σ(z)|.
    pub fn multiplicative(
        marks: MarkSpace<S>,
        sigma: impl Fn(S) -> S + Send + Sync + 'static,
        eta0: S,
        p_exponent: S,
    ) -> Result<Self> {
        let sigma = Arc::new(sigma);
        let marks_for_coeff = marks.clone();
        let marks_for_l = marks.clone();
        let marks_for_g = marks.clone();
        let marks_for_jac = marks.clone();
        let s1 = sigma.clone();
        let s2 = sigma.clone();
        let s3 = sigma.clone();
        let s4 = sigma;
        let model = NoiseModel::new(
            marks,
            move |_t, v: &HVector<S>, z| v.scale(s1(marks_for_coeff.location(z))),
            move |_t, z| s2(marks_for_l.location(z)).abs(),
            move |_t, z| s3(marks_for_g.location(z)).abs(),
            eta0,
            p_exponent,
        )?;
        Ok(model.with_jacobian(move |_t, v, z| {
            let d = v.dim();
            let s = s4(marks_for_jac.location(z));
            let mut jac = vec![vec![S::zero(); d]; d];
            for (i, row) in jac.iter_mut().enumerate() {
                row[i] = s;
            }
            jac
        }))
    }

    /// Additive noise f(t, v, z) = shape, constant in v (and t, z).
    pub fn additive(
        marks: MarkSpace<S>,
        shape: HVector<S>,
        spec: &TripleSpec<S>,
        eta0: S,
        p_exponent: S,
    ) -> Result<Self> {
        let norm = spec.norm_h(&shape)?;
        let dim = shape.dim();
        let model = NoiseModel::new(
            marks,
            move |_t, _v, _z| shape.clone(),
            move |_t, _z| norm,
            |_t, _z| S::zero(),
            eta0,
            p_exponent,
        )?;
        Ok(model.with_jacobian(move |_t, _v, _z| vec![vec![S::zero(); dim]; dim]))
    }

    /// True only for the canonical no-noise model built by [`NoiseModel::zero`].
    pub fn is_trivial(&self) -> bool {
        self.trivial
    }

    pub fn coeff(&self, t: S, v: &HVector<S>, z: &Mark<S>) -> HVector<S> {
        (self.coeff)(t, v, z)
    }

    pub fn l_f(&self, t: S, z: &Mark<S>) -> S {
        (self.l_f)(t, z)
    }

    pub fn g_f(&self, t: S, z: &Mark<S>) -> S {
        (self.g_f)(t, z)
    }

    /// Jacobian of v ↦ f(t, v, z); analytic if attached, otherwise central
    /// finite differences column by column.
    pub fn coeff_jacobian(&self, t: S, v: &HVector<S>, z: &Mark<S>) -> Vec<Vec<S>> {
        if let Some(jac) = &self.coeff_jacobian {
            return jac(t, v, z);
        }
        let d = v.dim();
        let h = S::of(1e-6) * (S::one() + v.dot(v).sqrt());
        let mut cols = Vec::with_capacity(d);
        for j in 0..d {
            let mut vp = v.clone();
            vp.0[j] = vp.0[j] + h;
            let mut vm = v.clone();
            vm.0[j] = vm.0[j] - h;
            let fp = self.coeff(t, &vp, z);
            let fm = self.coeff(t, &vm, z);
            cols.push(
                fp.0.iter()
                    .zip(&fm.0)
                    .map(|(&p, &m)| (p - m) / (S::of(2.0) * h))
                    .collect::<Vec<S>>(),
            );
        }
        // Transpose columns into rows.
        (0..d)
            .map(|i| (0..d).map(|j| cols[j][i]).collect())
            .collect()
    }

    /// ∫ ‖f(t, v, z)‖²_H ν(dz), by atom summation or quadrature.
    pub fn noise_integral_l2(&self, spec: &TripleSpec<S>, t: S, v: &HVector<S>) -> Result<S> {
        let mut bad = false;
        let val = self.marks.integrate(|z| {
            let fv = self.coeff(t, v, z);
            if !fv.is_finite() {
                bad = true;
            }
            fv.dot(&fv)
        });
        let _ = spec;
        if bad || !val.is_finite() {
            return Err(Error::NonFinite {
                context: "noise_integral_l2",
                t: t.as_f64(),
            });
        }
        Ok(val)
    }

    /// ∫ ‖f(t, v1, z) − f(t, v2, z)‖²_H ν(dz), the noise term of the local
    /// monotonicity condition.
    pub fn lipschitz_integral_l2(&self, t: S, v1: &HVector<S>, v2: &HVector<S>) -> S {
        self.marks.integrate(|z| {
            let d = self.coeff(t, v1, z).sub(&self.coeff(t, v2, z));
            d.dot(&d)
        })
    }

    /// ∫ f(t, v, z) w(z) ν(dz), componentwise.
    pub fn integrate_coeff(
        &self,
        t: S,
        v: &HVector<S>,
        w: impl Fn(&Mark<S>) -> S,
    ) -> HVector<S> {
        let dim = v.dim();
        match &self.marks {
            MarkSpace::Atoms(atoms) => {
                let mut out = HVector::zeros(dim);
                for (i, a) in atoms.iter().enumerate() {
                    let mark = Mark::Atom(i);
                    let weight = w(&mark) * a.mass;
                    if weight != S::zero() {
                        out.axpy(weight, &self.coeff(t, v, &mark));
                    }
                }
                out
            }
            MarkSpace::Density { lo, hi, pdf } => {
                let mut out = HVector::zeros(dim);
                for k in 0..dim {
                    out.0[k] = simpson(
                        |z| {
                            let mark = Mark::Point(z);
                            self.coeff(t, v, &mark).0[k] * w(&mark) * pdf(z)
                        },
                        *lo,
                        *hi,
                        SIMPSON_PANELS,
                    );
                }
                out
            }
        }
    }
}

/// Result of an exponential-integrability class membership check.
#[derive(Debug, Clone, Copy)]
pub struct HpReport<S> {
    pub member: bool,
    /// Largest δ in the grid with a finite quadrature, if any.
    pub best_delta: Option<S>,
}

/// Default δ grid for the exponential-integrability check.
pub fn default_delta_grid<S: Scalar>() -> Vec<S> {
    vec![S::of(1e-3), S::of(1e-2), S::of(1e-1), S::one()]
}

/// Membership of h in the class requiring ∫ exp(δ h^p) dν_T < ∞ for some
/// δ > 0, checked by quadrature over [0, horizon] × marks.
///
/// Finiteness is numerical: a quadrature that overflows the scalar type at
/// every δ in the grid reports non-membership.
pub fn check_class_hp<S: Scalar>(
    h: impl Fn(S, &Mark<S>) -> S,
    marks: &MarkSpace<S>,
    p: S,
    delta_grid: &[S],
    horizon: S,
) -> HpReport<S> {
    assert!(p > S::zero(), "class exponent must be positive");
    let mut best = None;
    for &delta in delta_grid {
        let integral = simpson(
            |t| marks.integrate(|z| (delta * h(t, z).powf(p)).exp()),
            S::zero(),
            horizon,
            64,
        );
        if integral.is_finite() {
            best = Some(match best {
                Some(b) if b > delta => b,
                _ => delta,
            });
        }
    }
    HpReport {
        member: best.is_some(),
        best_delta: best,
    }
}

/// Caller-provided data for the intensity bound checks.
pub struct NoiseBoundParams<S> {
    /// The γ of the squared-coefficient intensity bound.
    pub gamma: S,
    /// F_t of the squared-coefficient bound (shared with the drift conditions).
    pub f_t: Arc<dyn Fn(S) -> S + Send + Sync>,
    /// G_t of the (β+2)-moment intensity bound.
    pub g_t: Arc<dyn Fn(S) -> S + Send + Sync>,
}

/// Verify the noise growth/Lipschitz bounds, majorant integrability, the
/// exponential classes and the intensity bounds on random draws.
pub fn check_h5_h6<S: Scalar>(
    model: &NoiseModel<S>,
    spec: &TripleSpec<S>,
    samples: usize,
    seed: u64,
    horizon: S,
    params: &NoiseBoundParams<S>,
) -> Result<ConditionReport> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut report = ConditionReport::default();
    let dim = spec.dim();
    let ups = upsilon(spec.alpha, spec.beta, model.eta0);

    let sample_vector = |rng: &mut rand_chacha::ChaCha8Rng, scale: S| {
        let mut v = HVector::zeros(dim);
        for x in v.0.iter_mut() {
            *x = rng.random_range(-S::one()..S::one()) * scale;
        }
        v
    };

    // Linear growth: ‖f(t,v,z)‖ ≤ L_f(t,z)(1 + ‖v‖).
    let mut growth_margin = S::infinity();
    let mut growth_witness = None;
    // Lipschitz: ‖f(t,v1,z) − f(t,v2,z)‖ ≤ G_f(t,z)‖v1 − v2‖.
    let mut lip_margin = S::infinity();
    let mut lip_witness = None;
    for i in 0..samples.max(1) {
        let t: S = rng.random_range(S::zero()..horizon);
        // Log-spread magnitudes so unbounded growth is caught.
        let scale = S::of(10.0).powf(S::of_usize(i % 4) - S::one());
        let v = sample_vector(&mut rng, scale);
        let v2 = sample_vector(&mut rng, scale);
        let z = model.marks.sample_mark(&mut rng);
        let fv = model.coeff(t, &v, &z);
        if !fv.is_finite() {
            return Err(Error::NonFinite {
                context: "jump coefficient",
                t: t.as_f64(),
            });
        }
        let nh = spec.norm_h(&v)?;
        let m = model.l_f(t, &z) * (S::one() + nh) - spec.norm_h(&fv)?;
        if m < growth_margin {
            growth_margin = m;
            growth_witness = Some(nh.as_f64());
        }
        let df = fv.sub(&model.coeff(t, &v2, &z));
        let ml = model.g_f(t, &z) * spec.norm_h(&v.sub(&v2))? - spec.norm_h(&df)?;
        if ml < lip_margin {
            lip_margin = ml;
            lip_witness = Some(nh.as_f64());
        }
    }
    let tol = S::of(-1e-9);
    report.push(
        "linear_growth",
        growth_margin >= tol,
        growth_margin.as_f64(),
        if growth_margin >= tol { None } else { growth_witness },
    );
    report.push(
        "lipschitz",
        lip_margin >= tol,
        lip_margin.as_f64(),
        if lip_margin >= tol { None } else { lip_witness },
    );

    // Integrability of L_f in L_q(ν_T) for the required exponents.
    let two = S::of(2.0);
    let qs = [two, S::of(4.0), spec.beta + two, ups, ups / two];
    let mut worst_integral = S::zero();
    for &q in &qs {
        let integral = simpson(
            |t| model.marks.integrate(|z| model.l_f(t, z).powf(q)),
            S::zero(),
            horizon,
            64,
        );
        worst_integral = worst_integral.max(integral);
    }
    report.push(
        "majorant_integrability",
        worst_integral.is_finite(),
        worst_integral.as_f64(),
        None,
    );

    // Exponential classes: L_f at p_exponent, G_f at 2.
    let grid = default_delta_grid::<S>();
    let hp = check_class_hp(
        |t, z| model.l_f(t, z),
        &model.marks,
        model.p_exponent,
        &grid,
        horizon,
    );
    report.push(
        "majorant_exp_class",
        hp.member,
        hp.best_delta.map(|d| d.as_f64()).unwrap_or(0.0),
        None,
    );
    let h2 = check_class_hp(|t, z| model.g_f(t, z), &model.marks, two, &grid, horizon);
    report.push(
        "lipschitz_exp_class",
        h2.member,
        h2.best_delta.map(|d| d.as_f64()).unwrap_or(0.0),
        None,
    );

    // p ≥ Υ.
    let p_margin = model.p_exponent - ups;
    report.push("exponent_floor", p_margin >= S::zero(), p_margin.as_f64(), None);

    // Intensity bounds with caller-provided γ, F_t, G_t.
    let mut l2_margin = S::infinity();
    let mut l2_witness = None;
    let mut b2_margin = S::infinity();
    let mut b2_witness = None;
    for i in 0..samples.max(1) {
        let t: S = rng.random_range(S::zero()..horizon);
        let scale = S::of(10.0).powf(S::of_usize(i % 4) - S::one());
        let v = sample_vector(&mut rng, scale);
        let nh = spec.norm_h(&v)?;
        let l2 = model.noise_integral_l2(spec, t, &v)?;
        let bound = (params.f_t)(t) * (S::one() + nh * nh)
            + params.gamma * spec.norm_v_alpha(&v)?;
        let m = bound - l2;
        if m < l2_margin {
            l2_margin = m;
            l2_witness = Some(nh.as_f64());
        }
        let pb2 = spec.beta + two;
        let moment = model.marks.integrate(|z| {
            let fv = model.coeff(t, &v, z);
            fv.dot(&fv).sqrt().powf(pb2)
        });
        let bound2 = (params.g_t)(t) * (S::one() + nh.powf(pb2));
        let m2 = bound2 - moment;
        if m2 < b2_margin {
            b2_margin = m2;
            b2_witness = Some(nh.as_f64());
        }
    }
    report.push(
        "l2_intensity_bound",
        l2_margin >= tol,
        l2_margin.as_f64(),
        if l2_margin >= tol { None } else { l2_witness },
    );
    report.push(
        "higher_moment_intensity_bound",
        b2_margin >= tol,
        b2_margin.as_f64(),
        if b2_margin >= tol { None } else { b2_witness },
    );

    // γ must stay below θ/(2β); trivially satisfied when β = 0.
    let gamma_margin = if spec.beta > S::zero() {
        spec.theta / (two * spec.beta) - params.gamma
    } else {
        S::infinity()
    };
    report.push(
        "gamma_margin",
        gamma_margin > S::zero(),
        gamma_margin.as_f64(),
        None,
    );

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_spec(dim: usize) -> TripleSpec<f64> {
        TripleSpec::new(vec![1.0; dim], 2.0, 0.0, 1.0).unwrap()
    }

    fn bound_params(f: f64, g: f64, gamma: f64) -> NoiseBoundParams<f64> {
        NoiseBoundParams {
            gamma,
            f_t: Arc::new(move |_| f),
            g_t: Arc::new(move |_| g),
        }
    }

    #[test]
    fn nu_total_atom_sums() {
        let m = MarkSpace::atoms(&[(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_relative_eq!(nu_total(&m), 1.0);
        let m = MarkSpace::single_atom(0.0, 3.0).unwrap();
        assert_relative_eq!(nu_total(&m), 3.0);
    }

    #[test]
    fn nu_total_density_quadrature() {
        let m = MarkSpace::density(0.0, 2.0, |_| 1.0).unwrap();
        assert_relative_eq!(nu_total(&m), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn zero_mass_rejected() {
        assert!(MarkSpace::atoms(&[(0.0, 0.0)]).is_err());
        assert!(MarkSpace::<f64>::atoms(&[]).is_err());
        assert!(MarkSpace::density(0.0, 1.0, |_| 0.0).is_err());
    }

    #[test]
    fn upsilon_matches_hand_computation() {
        // α = 2, β = 0, η₀ = 1: max(0, 4·1·3/2, 4, 2) = 6.
        assert_relative_eq!(upsilon(2.0, 0.0, 1.0), 6.0);
        // α = 2, β = 4, η₀ = 0.5: max(2·4·1·2.5/2, 4·1·2.5/2, 4, 6) = 10.
        assert_relative_eq!(upsilon(2.0, 4.0, 0.5), 10.0);
    }

    #[test]
    fn noise_integral_l2_zero_coeff() {
        let spec = unit_spec(2);
        let m = NoiseModel::zero(MarkSpace::atoms(&[(0.0, 1.0)]).unwrap());
        let v = HVector::from_slice(&[1.0, 2.0]);
        assert_eq!(m.noise_integral_l2(&spec, 0.0, &v).unwrap(), 0.0);
    }

    #[test]
    fn noise_integral_l2_unit_vectors() {
        // Two atoms of mass 1; f maps atom i to the i-th basis vector.
        let spec = unit_spec(2);
        let marks = MarkSpace::atoms(&[(0.0, 1.0), (1.0, 1.0)]).unwrap();
        let m = NoiseModel::new(
            marks,
            |_t, _v, z: &Mark<f64>| match z {
                Mark::Atom(i) => HVector::basis(2, *i),
                _ => unreachable!(),
            },
            |_t, _z| 1.0,
            |_t, _z| 0.0,
            1.0,
            8.0,
        )
        .unwrap();
        let v = HVector::zeros(2);
        assert_relative_eq!(m.noise_integral_l2(&spec, 0.0, &v).unwrap(), 2.0);
    }

    #[test]
    fn noise_integral_l2_multiplicative() {
        // Σ σ²(z_i) mass_i = 0.25, ‖v‖ = 2 → integral = 1.
        let spec = unit_spec(1);
        let marks = MarkSpace::atoms(&[(1.0, 0.25)]).unwrap();
        let m = NoiseModel::multiplicative(marks, |_z| 1.0, 1.0, 8.0).unwrap();
        let v = HVector::from_slice(&[2.0]);
        assert_relative_eq!(m.noise_integral_l2(&spec, 0.0, &v).unwrap(), 1.0);
    }

    #[test]
    fn hp_class_bounded_h_passes_all_deltas() {
        let marks = MarkSpace::atoms(&[(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let grid = default_delta_grid::<f64>();
        let r = check_class_hp(|_t, _z| 5.0, &marks, 2.0, &grid, 1.0);
        assert!(r.member);
        assert_relative_eq!(r.best_delta.unwrap(), 1.0);
    }

    #[test]
    fn hp_class_zero_h_total_mass() {
        let marks = MarkSpace::atoms(&[(0.0, 3.0)]).unwrap();
        let r = check_class_hp(|_t, _z| 0.0, &marks, 2.0, &[1.0], 1.0);
        assert!(r.member);
    }

    #[test]
    fn hp_class_heavy_tail_fails_at_large_delta() {
        // h(z) = z against density z^-3 on a wide truncated interval:
        // exp(δ z²) overflows f64 at every grid δ, flagging non-membership.
        let marks = MarkSpace::density(1.0, 1e3, |z: f64| z.powi(-3)).unwrap();
        let r = check_class_hp(|_t, z: &Mark<f64>| match z {
            Mark::Point(v) => *v,
            _ => unreachable!(),
        }, &marks, 2.0, &[1.0, 10.0], 1.0);
        assert!(!r.member);
    }

    #[test]
    fn hp_monotone_in_p() {
        // Membership at p implies membership at smaller p' for bounded h.
        let marks = MarkSpace::atoms(&[(0.0, 1.0)]).unwrap();
        let grid = default_delta_grid::<f64>();
        for h_level in [0.5, 2.0, 10.0] {
            let at_p = check_class_hp(|_t, _z| h_level, &marks, 4.0, &grid, 1.0);
            let at_smaller = check_class_hp(|_t, _z| h_level, &marks, 2.0, &grid, 1.0);
            if at_p.member {
                assert!(at_smaller.member);
            }
        }
    }

    #[test]
    fn h5_h6_multiplicative_bounded_sigma_passes() {
        let spec = unit_spec(2);
        let marks = MarkSpace::atoms(&[(0.0, 0.5), (1.0, 0.5)]).unwrap();
        let m = NoiseModel::multiplicative(marks, |z| 0.3 + 0.1 * z, 1.0, 8.0).unwrap();
        // ∫‖σ v‖²ν ≤ (max σ)² m ‖v‖² ≤ F(1+‖v‖²) with F = 0.2.
        let params = bound_params(0.2, 0.2, 0.0);
        let r = check_h5_h6(&m, &spec, 500, 7, 1.0, &params).unwrap();
        assert!(r.all_pass(), "{:?}", r.checks);
    }

    #[test]
    fn h5_h6_additive_passes_with_zero_lipschitz() {
        let spec = unit_spec(2);
        let marks = MarkSpace::atoms(&[(0.0, 1.0)]).unwrap();
        let shape = HVector::from_slice(&[0.6, 0.8]);
        let m = NoiseModel::additive(marks, shape, &spec, 1.0, 8.0).unwrap();
        let params = bound_params(1.0, 1.0, 0.0);
        let r = check_h5_h6(&m, &spec, 300, 3, 1.0, &params).unwrap();
        assert!(r.all_pass(), "{:?}", r.checks);
        assert_eq!(m.g_f(0.0, &Mark::Atom(0)), 0.0);
    }

    #[test]
    fn h5_h6_exponential_growth_fails_with_witness() {
        let spec = unit_spec(2);
        let marks = MarkSpace::atoms(&[(0.0, 1.0)]).unwrap();
        let m = NoiseModel::new(
            marks,
            |_t, v: &HVector<f64>, _z| {
                let n = v.dot(v).sqrt();
                HVector::basis(2, 0).scale(n.exp())
            },
            |_t, _z| 1.0,
            |_t, _z| 1.0,
            1.0,
            8.0,
        )
        .unwrap();
        let params = bound_params(10.0, 10.0, 0.0);
        let r = check_h5_h6(&m, &spec, 500, 11, 1.0, &params).unwrap();
        let growth = r.get("linear_growth").unwrap();
        assert!(!growth.pass);
        assert!(growth.witness_norm.is_some());
    }

    #[test]
    fn atom_sum_independent_of_order() {
        // Exactness check against a reversed summation order.
        let pairs: Vec<(f64, f64)> = (1..=11).map(|i| (i as f64, 0.1 * i as f64)).collect();
        let marks = MarkSpace::atoms(&pairs).unwrap();
        let rev: Vec<(f64, f64)> = pairs.iter().rev().copied().collect();
        let marks_rev = MarkSpace::atoms(&rev).unwrap();
        let f = |z: &Mark<f64>| match z {
            Mark::Atom(i) => (*i as f64 + 1.0).sin().powi(2),
            _ => unreachable!(),
        };
        let a = marks.integrate(f);
        let g = |z: &Mark<f64>| match z {
            Mark::Atom(i) => (11.0 - *i as f64).sin().powi(2),
            _ => unreachable!(),
        };
        let b = marks_rev.integrate(g);
        assert_relative_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn finite_difference_jacobian_matches_analytic() {
        let marks = MarkSpace::atoms(&[(2.0, 1.0)]).unwrap();
        let with_analytic =
            NoiseModel::multiplicative(marks.clone(), |z| 0.5 * z, 1.0, 8.0).unwrap();
        let without = NoiseModel::new(
            marks,
            |_t, v: &HVector<f64>, _z| v.scale(1.0),
            |_t, _z| 1.0,
            |_t, _z| 1.0,
            1.0,
            8.0,
        )
        .unwrap();
        let v = HVector::from_slice(&[1.0, -2.0]);
        let ja = with_analytic.coeff_jacobian(0.0, &v, &Mark::Atom(0));
        assert_relative_eq!(ja[0][0], 1.0);
        assert_relative_eq!(ja[1][1], 1.0);
        assert_relative_eq!(ja[0][1], 0.0);
        let jf = without.coeff_jacobian(0.0, &v, &Mark::Atom(0));
        assert_relative_eq!(jf[0][0], 1.0, epsilon = 1e-6);
        assert_relative_eq!(jf[1][0], 0.0, epsilon = 1e-6);
    }
}
