//! The locally monotone drift: a pluggable operator interface, three built-in
//! instances (diagonal linear, dissipative reaction-diffusion, 1-D spectral
//! Burgers) and numerical checkers for the structural conditions.
//!
//! The checkers sample; a pass means "no violation found in N samples", never
//! a proof. Constants are derived per instance so that the conditions hold
//! provably in the Galerkin space, which makes the checkers a regression net
//! rather than a tuning device.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::numerics::trapezoid;
use crate::report::ConditionReport;
use crate::scalar::Scalar;
use crate::triple::{HVector, TripleSpec};

/// Structural constants claimed by a drift operator.
#[derive(Debug, Clone, Copy)]
pub struct DriftConstants<S> {
    /// Coercivity constant θ > 0.
    pub theta: S,
    /// Coercivity exponent α > 1.
    pub alpha: S,
    /// Growth exponent β ≥ 0.
    pub beta: S,
    /// Growth constant C > 0.
    pub growth_c: S,
}

impl<S: Scalar> DriftConstants<S> {
    pub fn new(theta: S, alpha: S, beta: S, growth_c: S) -> Result<Self> {
        if !(theta > S::zero()) {
            return Err(Error::invalid("coercivity constant theta must be positive"));
        }
        if !(alpha > S::one()) {
            return Err(Error::invalid("coercivity exponent alpha must exceed 1"));
        }
        if !(beta >= S::zero()) {
            return Err(Error::invalid("growth exponent beta must be nonnegative"));
        }
        if !(growth_c > S::zero()) {
            return Err(Error::invalid("growth constant must be positive"));
        }
        Ok(DriftConstants {
            theta,
            alpha,
            beta,
            growth_c,
        })
    }
}

/// A drift operator mapping V into V* in Galerkin coordinates.
pub trait DriftOperator<S: Scalar>: Send + Sync {
    /// Evaluate the drift at (t, v) into `out`.
    fn apply_into(&self, t: S, v: &HVector<S>, out: &mut HVector<S>);

    fn apply(&self, t: S, v: &HVector<S>) -> HVector<S> {
        let mut out = HVector::zeros(v.dim());
        self.apply_into(t, v, &mut out);
        out
    }

    fn constants(&self) -> DriftConstants<S>;

    /// Monotonicity rate K_t.
    fn k_at(&self, t: S) -> S;

    /// Coercivity/growth weight F_t.
    fn f_at(&self, t: S) -> S;

    /// Local monotonicity defect ρ(v), measurable and bounded on balls.
    fn rho(&self, v: &HVector<S>) -> S;

    /// Diagonal of a stiff linear part L with drift = -L ⊙ v + remainder;
    /// solvers treat it implicitly with an exact resolvent.
    fn stiff_diagonal(&self) -> Option<Vec<S>> {
        None
    }

    /// Jacobian of v ↦ drift(t, v), rows indexed by output component.
    /// Default: central finite differences.
    fn jacobian(&self, t: S, v: &HVector<S>) -> Vec<Vec<S>> {
        let d = v.dim();
        let h = S::of(1e-6) * (S::one() + v.dot(v).sqrt());
        let mut jac = vec![vec![S::zero(); d]; d];
        let mut vp = v.clone();
        let mut fp = HVector::zeros(d);
        let mut fm = HVector::zeros(d);
        for j in 0..d {
            let orig = vp.0[j];
            vp.0[j] = orig + h;
            self.apply_into(t, &vp, &mut fp);
            vp.0[j] = orig - h;
            self.apply_into(t, &vp, &mut fm);
            vp.0[j] = orig;
            for i in 0..d {
                jac[i][j] = (fp.0[i] - fm.0[i]) / (S::of(2.0) * h);
            }
        }
        jac
    }

    /// ∫_a^b K_s ds by the trapezoid rule (exact for the constant built-ins).
    fn k_integral(&self, a: S, b: S) -> S {
        trapezoid(|t| self.k_at(t), a, b, 256)
    }
}

/// Linear diagonal drift -a Λ v with Λ = diag(spectral weights).
#[derive(Debug, Clone)]
pub struct LinearDrift<S> {
    weights: Vec<S>,
    a: S,
    constants: DriftConstants<S>,
    k_const: S,
    f_const: S,
}

impl<S: Scalar> LinearDrift<S> {
    pub fn new(spec: &TripleSpec<S>, a: S) -> Result<Self> {
        if !(a > S::zero()) {
            return Err(Error::invalid("diffusion rate a must be positive"));
        }
        // Coercivity holds with equality at theta = 2a; the constant F term
        // keeps the checked margins strictly positive.
        let constants = DriftConstants::new(S::of(2.0) * a, S::of(2.0), S::zero(), a * a)?;
        Ok(LinearDrift {
            weights: spec.v_weights().to_vec(),
            a,
            constants,
            k_const: S::zero(),
            f_const: S::one(),
        })
    }

    /// Override the claimed coercivity constant (for falsification tests).
    pub fn with_theta(mut self, theta: S) -> Result<Self> {
        self.constants = DriftConstants::new(
            theta,
            self.constants.alpha,
            self.constants.beta,
            self.constants.growth_c,
        )?;
        Ok(self)
    }

    /// Bump the monotonicity rate to absorb a noise Lipschitz integral.
    pub fn with_k_const(mut self, k: S) -> Self {
        self.k_const = k;
        self
    }
}

impl<S: Scalar> DriftOperator<S> for LinearDrift<S> {
    fn apply_into(&self, _t: S, v: &HVector<S>, out: &mut HVector<S>) {
        for ((o, &x), &w) in out.0.iter_mut().zip(&v.0).zip(&self.weights) {
            *o = -self.a * w * x;
        }
    }

    fn constants(&self) -> DriftConstants<S> {
        self.constants
    }

    fn k_at(&self, _t: S) -> S {
        self.k_const
    }

    fn f_at(&self, _t: S) -> S {
        self.f_const
    }

    fn rho(&self, _v: &HVector<S>) -> S {
        S::zero()
    }

    fn stiff_diagonal(&self) -> Option<Vec<S>> {
        Some(self.weights.iter().map(|&w| self.a * w).collect())
    }

    fn jacobian(&self, _t: S, v: &HVector<S>) -> Vec<Vec<S>> {
        let d = v.dim();
        let mut jac = vec![vec![S::zero(); d]; d];
        for i in 0..d {
            jac[i][i] = -self.a * self.weights[i];
        }
        jac
    }
}

/// Reaction-diffusion drift -a Λ v - c v^⊙p with odd power p ≥ 3 applied in
/// basis coordinates; globally monotone for c ≥ 0.
#[derive(Debug, Clone)]
pub struct ReactionDiffusionDrift<S> {
    weights: Vec<S>,
    a: S,
    c: S,
    power: u32,
    constants: DriftConstants<S>,
    f_const: S,
}

impl<S: Scalar> ReactionDiffusionDrift<S> {
    pub fn new(spec: &TripleSpec<S>, a: S, c: S, odd_power: u32) -> Result<Self> {
        if odd_power % 2 == 0 || odd_power < 3 {
            return Err(Error::invalid("reaction power must be odd and at least 3"));
        }
        if !(c >= S::zero()) {
            return Err(Error::invalid("reaction coefficient must be dissipative (c >= 0)"));
        }
        if !(a >= S::zero()) || (a == S::zero() && c == S::zero()) {
            return Err(Error::invalid("need a > 0 or c > 0"));
        }
        let two = S::of(2.0);
        // beta = 2(p-1) covers the polynomial term in the growth condition.
        let beta = two * (S::of(odd_power as f64) - S::one());
        let mu_min = spec
            .v_weights()
            .iter()
            .copied()
            .fold(S::infinity(), S::min);
        let mu_max = spec.v_weights().iter().copied().fold(S::zero(), S::max);
        let (theta, f_const) = if a > S::zero() {
            (two * a, S::one())
        } else {
            // Pure reaction: theta x^2 - 2 c x^4 per coordinate is bounded by
            // (theta mu_max)^2 / (8c), summed over coordinates.
            let theta = c;
            let q = S::of_usize(spec.dim()) * (theta * mu_max) * (theta * mu_max)
                / (S::of(8.0) * c);
            (theta, S::one() + q)
        };
        let growth_c = two * (a * a).max(c * c / (mu_min * mu_min)).max(S::of(1e-30));
        let constants = DriftConstants::new(theta, two, beta, growth_c)?;
        Ok(ReactionDiffusionDrift {
            weights: spec.v_weights().to_vec(),
            a,
            c,
            power: odd_power,
            constants,
            f_const,
        })
    }
}

impl<S: Scalar> DriftOperator<S> for ReactionDiffusionDrift<S> {
    fn apply_into(&self, _t: S, v: &HVector<S>, out: &mut HVector<S>) {
        for ((o, &x), &w) in out.0.iter_mut().zip(&v.0).zip(&self.weights) {
            *o = -self.a * w * x - self.c * x.powi(self.power as i32);
        }
    }

    fn constants(&self) -> DriftConstants<S> {
        self.constants
    }

    fn k_at(&self, _t: S) -> S {
        S::zero()
    }

    fn f_at(&self, _t: S) -> S {
        self.f_const
    }

    fn rho(&self, _v: &HVector<S>) -> S {
        S::zero()
    }

    fn stiff_diagonal(&self) -> Option<Vec<S>> {
        Some(self.weights.iter().map(|&w| self.a * w).collect())
    }

    fn jacobian(&self, _t: S, v: &HVector<S>) -> Vec<Vec<S>> {
        let d = v.dim();
        let p = S::of(self.power as f64);
        let mut jac = vec![vec![S::zero(); d]; d];
        for i in 0..d {
            jac[i][i] =
                -self.a * self.weights[i] - self.c * p * v.0[i].powi(self.power as i32 - 1);
        }
        jac
    }
}

/// 1-D spectral Burgers drift -a Λ v - B(v, v) on the Dirichlet sine basis
/// e_k(x) = √2 sin(kπx), with the convection tensor in closed form:
/// ⟨u ∂x w, e_k⟩ expands over pairs (i, j) into contributions at k = i - j,
/// k = i + j (plus sign) and k = j - i (minus sign) with weight √2 jπ / 2.
#[derive(Debug, Clone)]
pub struct BurgersDrift<S> {
    weights: Vec<S>,
    a: S,
    constants: DriftConstants<S>,
    rho_c: S,
}

impl<S: Scalar> BurgersDrift<S> {
    /// Requires spectral weights mu_k = k², the scale on which the convection
    /// tensor and the local-monotonicity constant are derived.
    pub fn new(spec: &TripleSpec<S>, a: S) -> Result<Self> {
        if !(a > S::zero()) {
            return Err(Error::invalid("viscosity a must be positive"));
        }
        for (k, &w) in spec.v_weights().iter().enumerate() {
            let expect = S::of_usize((k + 1) * (k + 1));
            if (w - expect).abs() > S::of(1e-9) * expect {
                return Err(Error::invalid(
                    "Burgers drift needs spectral weights mu_k = k^2",
                ));
            }
        }
        let d = S::of_usize(spec.dim());
        let two = S::of(2.0);
        let pi = S::PI();
        // rho(v) = rho_c ‖v‖_V² with rho_c = π² d / (4a) makes the local
        // monotonicity inequality provable with K ≡ 0: the convection defect
        // is at most √2 π √d ‖v₂‖_V ‖Δ‖²_H and the parabola
        // rho_c x² - √2 π √d x + 2a is nonnegative.
        let rho_c = pi * pi * d / (S::of(4.0) * a);
        let growth_c = (two * a * a).max(S::of(4.0) * d * pi * pi);
        let constants = DriftConstants::new(two * a, two, two, growth_c)?;
        Ok(BurgersDrift {
            weights: spec.v_weights().to_vec(),
            a,
            constants,
            rho_c,
        })
    }

    /// Convection term B(u, w)_k = ⟨u ∂x w, e_k⟩ (1-based mode arithmetic).
    pub fn convection(&self, u: &HVector<S>, w: &HVector<S>) -> HVector<S> {
        let d = self.weights.len();
        let mut out = HVector::zeros(d);
        let half_sqrt2_pi = S::SQRT_2() * S::PI() / S::of(2.0);
        for i in 1..=d {
            let ui = u.0[i - 1];
            if ui == S::zero() {
                continue;
            }
            for j in 1..=d {
                let c = ui * w.0[j - 1] * half_sqrt2_pi * S::of_usize(j);
                if i > j {
                    out.0[i - j - 1] = out.0[i - j - 1] + c;
                }
                if i + j <= d {
                    out.0[i + j - 1] = out.0[i + j - 1] + c;
                }
                if j > i {
                    out.0[j - i - 1] = out.0[j - i - 1] - c;
                }
            }
        }
        out
    }
}

impl<S: Scalar> DriftOperator<S> for BurgersDrift<S> {
    fn apply_into(&self, _t: S, v: &HVector<S>, out: &mut HVector<S>) {
        let b = self.convection(v, v);
        for (((o, &x), &w), &bk) in out.0.iter_mut().zip(&v.0).zip(&self.weights).zip(&b.0) {
            *o = -self.a * w * x - bk;
        }
    }

    fn constants(&self) -> DriftConstants<S> {
        self.constants
    }

    fn k_at(&self, _t: S) -> S {
        S::zero()
    }

    fn f_at(&self, _t: S) -> S {
        S::one()
    }

    fn rho(&self, v: &HVector<S>) -> S {
        let nv2 = v
            .0
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * x * x)
            .sum::<S>();
        self.rho_c * nv2
    }

    fn stiff_diagonal(&self) -> Option<Vec<S>> {
        Some(self.weights.iter().map(|&w| self.a * w).collect())
    }

    fn jacobian(&self, _t: S, v: &HVector<S>) -> Vec<Vec<S>> {
        let d = self.weights.len();
        let mut jac = vec![vec![S::zero(); d]; d];
        for i in 0..d {
            jac[i][i] = -self.a * self.weights[i];
        }
        let half_sqrt2_pi = S::SQRT_2() * S::PI() / S::of(2.0);
        // d/dv_l of Σ v_i v_j T_ijk: contributions at the same targets,
        // with v_j (for l = i) and v_i (for l = j) as the surviving factor.
        for i in 1..=d {
            for j in 1..=d {
                let c = half_sqrt2_pi * S::of_usize(j);
                let mut targets = [(0usize, S::zero()); 3];
                let mut n = 0;
                if i > j {
                    targets[n] = (i - j - 1, S::one());
                    n += 1;
                }
                if i + j <= d {
                    targets[n] = (i + j - 1, S::one());
                    n += 1;
                }
                if j > i {
                    targets[n] = (j - i - 1, -S::one());
                    n += 1;
                }
                for &(k, sign) in &targets[..n] {
                    jac[k][i - 1] = jac[k][i - 1] - sign * c * v.0[j - 1];
                    jac[k][j - 1] = jac[k][j - 1] - sign * c * v.0[i - 1];
                }
            }
        }
        jac
    }
}

/// Settings for the condition checker.
#[derive(Debug, Clone, Copy)]
pub struct CheckSettings<S> {
    pub samples: usize,
    pub seed: u64,
    /// Relative jump threshold of the hemicontinuity check.
    pub tol: S,
    pub horizon: S,
}

impl<S: Scalar> CheckSettings<S> {
    pub fn new(samples: usize, seed: u64, tol: S) -> Result<Self> {
        if samples == 0 {
            return Err(Error::invalid("need at least one sample"));
        }
        if !(tol > S::zero()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        Ok(CheckSettings {
            samples,
            seed,
            tol,
            horizon: S::one(),
        })
    }
}

fn sample_scaled_vector<S: Scalar>(rng: &mut ChaCha8Rng, dim: usize, scale: S) -> HVector<S> {
    let mut v = HVector::zeros(dim);
    for x in v.0.iter_mut() {
        *x = rng.random_range(-S::one()..S::one()) * scale;
    }
    v
}

/// Deterministic probes: scaled basis vectors, both signs. These guarantee a
/// witness for inflated coercivity constants on diagonal models.
fn basis_probes<S: Scalar>(dim: usize) -> Vec<HVector<S>> {
    let mut probes = Vec::new();
    for k in 0..dim {
        for &m in &[1.0, 10.0, 100.0] {
            probes.push(HVector::basis(dim, k).scale(S::of(m)));
            probes.push(HVector::basis(dim, k).scale(S::of(-m)));
        }
    }
    probes
}

/// Check the four structural drift conditions plus the defect growth bound
/// by sampling; the noise term of the monotonicity condition is included
/// when a model is supplied, and taken as zero otherwise.
pub fn check_conditions<S: Scalar>(
    op: &dyn DriftOperator<S>,
    spec: &TripleSpec<S>,
    noise: Option<&NoiseModel<S>>,
    settings: &CheckSettings<S>,
) -> Result<ConditionReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let dim = spec.dim();
    let consts = op.constants();
    let two = S::of(2.0);
    let mut report = ConditionReport::default();

    let eval = |t: S, v: &HVector<S>| -> Result<HVector<S>> {
        let out = op.apply(t, v);
        if !out.is_finite() {
            return Err(Error::NonFinite {
                context: "drift operator",
                t: t.as_f64(),
            });
        }
        Ok(out)
    };

    let mut probes = basis_probes::<S>(dim);
    let scales = [S::of(0.1), S::one(), S::of(10.0), S::of(100.0)];
    while probes.len() < settings.samples + 6 * dim {
        let scale = scales[probes.len() % scales.len()];
        probes.push(sample_scaled_vector(&mut rng, dim, scale));
    }

    // Hemicontinuity: bisect each interval of a 9-point grid in s, chasing
    // the largest increment of s ↦ ⟨drift(t, v1 + s v2), v⟩; for a continuous
    // map the chased increment collapses, for a jump it stabilizes.
    let mut hemi_margin = S::infinity();
    let mut hemi_witness = None;
    let hemi_trials = settings.samples.min(24).max(4);
    for _ in 0..hemi_trials {
        let t = rng.random_range(S::zero()..settings.horizon);
        let v1 = sample_scaled_vector(&mut rng, dim, S::one());
        let v2 = sample_scaled_vector(&mut rng, dim, S::one());
        let dir = sample_scaled_vector(&mut rng, dim, S::one());
        let g = |s: S| -> Result<S> {
            let mut arg = v1.clone();
            arg.axpy(s, &v2);
            spec.pairing(&eval(t, &arg)?, &dir)
        };
        let grid: Vec<S> = (0..9)
            .map(|i| S::of(-1.0) + S::of(0.25) * S::of_usize(i))
            .collect();
        let gvals = grid.iter().map(|&s| g(s)).collect::<Result<Vec<S>>>()?;
        let scale = gvals
            .iter()
            .fold(S::one(), |acc, &x| acc.max(x.abs()));
        let mut max_jump = S::zero();
        for w in 0..8 {
            let (mut a, mut b) = (grid[w], grid[w + 1]);
            let (mut ga, mut gb) = (gvals[w], gvals[w + 1]);
            for _ in 0..30 {
                let mid = (a + b) * S::of(0.5);
                if mid == a || mid == b {
                    break;
                }
                let gm = g(mid)?;
                if (gm - ga).abs() >= (gb - gm).abs() {
                    b = mid;
                    gb = gm;
                } else {
                    a = mid;
                    ga = gm;
                }
            }
            max_jump = max_jump.max((gb - ga).abs());
        }
        let margin = settings.tol * scale - max_jump;
        if margin < hemi_margin {
            hemi_margin = margin;
            hemi_witness = Some(spec.norm_h(&v1)?.as_f64());
        }
    }
    report.push(
        "hemicontinuity",
        hemi_margin > S::zero(),
        hemi_margin.as_f64(),
        if hemi_margin > S::zero() { None } else { hemi_witness },
    );

    // Local monotonicity, coercivity, growth and the defect bound share the
    // probe set.
    let mut mono_margin = S::infinity();
    let mut mono_witness = None;
    let mut coer_margin = S::infinity();
    let mut coer_witness = None;
    let mut grow_margin = S::infinity();
    let mut grow_witness = None;
    let mut rho_margin = S::infinity();
    let mut rho_witness = None;

    for (idx, v) in probes.iter().enumerate() {
        let t = rng.random_range(S::zero()..settings.horizon);
        let av = eval(t, v)?;
        let nh = spec.norm_h(v)?;
        let nv = spec.norm_v(v)?;
        let f_t = op.f_at(t);

        // Coercivity: 2⟨A v, v⟩ + θ ‖v‖_V^α ≤ F_t (1 + ‖v‖_H²).
        let lhs = two * spec.pairing(&av, v)? + consts.theta * nv.powf(consts.alpha);
        let m = f_t * (S::one() + nh * nh) - lhs;
        if m < coer_margin {
            coer_margin = m;
            coer_witness = Some(nh.as_f64());
        }

        // Growth: ‖A v‖_V*^{α/(α-1)} ≤ (F_t + C ‖v‖_V^α)(1 + ‖v‖_H^β).
        let dual = spec.norm_vstar(&av)?;
        let lhs = dual.powf(consts.alpha / (consts.alpha - S::one()));
        let rhs = (f_t + consts.growth_c * nv.powf(consts.alpha))
            * (S::one() + nh.powf(consts.beta));
        let m = rhs - lhs;
        if m < grow_margin {
            grow_margin = m;
            grow_witness = Some(nh.as_f64());
        }

        // Defect growth: ρ(v) ≤ C (1 + ‖v‖_V^α)(1 + ‖v‖_H^β).
        let m = consts.growth_c * (S::one() + nv.powf(consts.alpha))
            * (S::one() + nh.powf(consts.beta))
            - op.rho(v);
        if m < rho_margin {
            rho_margin = m;
            rho_witness = Some(nh.as_f64());
        }

        // Local monotonicity against the next probe.
        let other = &probes[(idx + 1) % probes.len()];
        let diff = v.sub(other);
        let a_other = eval(t, other)?;
        let d_pair = two * spec.pairing(&av.sub(&a_other), &diff)?;
        let noise_term = match noise {
            Some(model) => model.lipschitz_integral_l2(t, v, other),
            None => S::zero(),
        };
        let ndiff2 = spec.norm_h(&diff)?.powi(2);
        let m = (op.k_at(t) + op.rho(other)) * ndiff2 - d_pair - noise_term;
        if m < mono_margin {
            mono_margin = m;
            mono_witness = Some(ndiff2.sqrt().as_f64());
        }
    }

    // Tiny negative slack for floating-point cancellation at equality cases.
    let fp_slack = -S::of(1e-9);
    report.push(
        "local_monotonicity",
        mono_margin >= fp_slack,
        mono_margin.as_f64(),
        if mono_margin >= fp_slack { None } else { mono_witness },
    );
    report.push(
        "coercivity",
        coer_margin > S::zero(),
        coer_margin.as_f64(),
        if coer_margin > S::zero() { None } else { coer_witness },
    );
    report.push(
        "growth",
        grow_margin >= fp_slack,
        grow_margin.as_f64(),
        if grow_margin >= fp_slack { None } else { grow_witness },
    );
    report.push(
        "defect_growth",
        rho_margin >= S::zero(),
        rho_margin.as_f64(),
        if rho_margin >= S::zero() { None } else { rho_witness },
    );
    Ok(report)
}
