//! Gain synthesis and certificate checks for the translation observer.
//!
//! The translation kinematics with position output,
//!
//! ```text
//! d/dt [p; v; b] = A(t) [p; v; b] + known input,   A(t) = [[0, I, 0], [0, 0, −R(t)], [0, 0, 0]],
//! y = C x,   C = [I 0 0],
//! ```
//!
//! are uniformly observable for every rotation history. The coordinate change
//! `z = Υ(t) x` brings them to the block companion form
//! `A_o = [[0, 0, 0], [I, 0, 0], [0, I, 0]]`, `C_o = [0 0 I]`, where a constant
//! gain `K_o = [k₁I; k₂I; k₃I]` places the error poles at the roots of
//! `s³ + k₃s² + k₂s + k₁`. The metric `M(t) = Υᵀ P Υ` then certifies
//! contraction of the original error dynamics.

use nalgebra::{Complex, DMatrix, DVector, Matrix3, SMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::quat::{skew_residual, Mat3};

pub type Mat9 = SMatrix<f64, 9, 9>;
pub type Mat9x3 = SMatrix<f64, 9, 3>;
pub type Mat3x9 = SMatrix<f64, 3, 9>;

/// Skew-symmetry tolerance for `Ω` and `Ω̇` inputs.
pub const SKEW_TOLERANCE: f64 = 1e-9;

/// Determinant magnitude below which the observability matrix counts as rank deficient.
pub const OBSERVABILITY_DET_TOLERANCE: f64 = 1e-6;

fn block(m: &mut Mat9, row: usize, col: usize, b: &Mat3) {
    m.fixed_view_mut::<3, 3>(3 * row, 3 * col).copy_from(b);
}

/// 9×9 matrix assembled from a 3×3 grid of 3×3 blocks.
pub fn from_blocks(blocks: [[Mat3; 3]; 3]) -> Mat9 {
    let mut m = Mat9::zeros();
    for (i, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            block(&mut m, i, j, b);
        }
    }
    m
}

/// Translation-kinematics state matrix `A(t)` for the given attitude.
pub fn system_matrix(r: &Mat3) -> Mat9 {
    let z = Mat3::zeros();
    let i = Mat3::identity();
    from_blocks([[z, i, z], [z, z, -r], [z, z, z]])
}

/// Position output map `C = [I 0 0]`.
pub fn output_matrix() -> Mat3x9 {
    let mut c = Mat3x9::zeros();
    c.fixed_view_mut::<3, 3>(0, 0).copy_from(&Mat3::identity());
    c
}

/// Observability matrix `[C; L_A C; L_A² C]` with `L_A X = Ẋ + X A`.
///
/// `C` and `L_A C = [0 I 0]` are constant, so only the `X A` products
/// contribute. The result is `diag(I, I, −R)`.
pub fn observability_matrix(r: &Mat3) -> Mat9 {
    let a = system_matrix(r);
    let mut o = Mat9::zeros();
    let mut row = output_matrix();
    for k in 0..3 {
        o.fixed_view_mut::<3, 9>(3 * k, 0).copy_from(&row);
        row *= a;
    }
    o
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservabilityReport {
    pub observable: bool,
    pub det: f64,
    pub condition_number: f64,
}

/// Rank test on `𝒪` for the attitude matrix `r`. Accepts arbitrary
/// matrices so degenerate attitude feeds can be diagnosed.
pub fn check_uniform_observability(r: &Mat3) -> ObservabilityReport {
    let o = observability_matrix(r);
    let det = o.determinant();
    let sv = o.singular_values();
    let (max, min) = (sv.max(), sv.min());
    let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
    ObservabilityReport {
        observable: det.abs() > OBSERVABILITY_DET_TOLERANCE,
        det,
        condition_number,
    }
}

/// Per-axis translation gains, `K_i = k_i I₃`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationGains {
    k1: f64,
    k2: f64,
    k3: f64,
}

impl TranslationGains {
    /// Validates positivity and the Hurwitz (Routh) condition `k₃k₂ > k₁`.
    pub fn new(k1: f64, k2: f64, k3: f64) -> Result<Self> {
        for (name, value) in [("k1", k1), ("k2", k2), ("k3", k3)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidGain { name, value });
            }
        }
        if k3 * k2 <= k1 {
            return Err(Error::NotHurwitz { k1, k2, k3 });
        }
        Ok(Self { k1, k2, k3 })
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k3(&self) -> f64 {
        self.k3
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }

    /// `K_o = [k₁I; k₂I; k₃I]`.
    pub fn canonical_gain(&self) -> Mat9x3 {
        let mut k = Mat9x3::zeros();
        for (i, g) in self.as_array().into_iter().enumerate() {
            k.fixed_view_mut::<3, 3>(3 * i, 0).copy_from(&(Mat3::identity() * g));
        }
        k
    }

    /// Roots of `s³ + k₃s² + k₂s + k₁` from the companion matrix, polished by Newton.
    pub fn poles(&self) -> [Complex<f64>; 3] {
        let companion = Matrix3::new(-self.k3, -self.k2, -self.k1, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let eig = companion.complex_eigenvalues();
        let mut roots = [eig[0], eig[1], eig[2]];
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let p = ((*r + self.k3) * *r + self.k2) * *r + self.k1;
                let dp = (*r * 3.0 + 2.0 * self.k3) * *r + self.k2;
                if dp.norm() < 1e-8 {
                    break;
                }
                *r -= p / dp;
            }
        }
        roots
    }
}

/// Gains whose closed-loop polynomial is `∏(s − pᵢ)`.
pub fn pole_place(poles: [Complex<f64>; 3]) -> Result<TranslationGains> {
    let scale = poles.iter().map(|p| p.norm()).fold(1.0, f64::max);
    for p in &poles {
        if !(p.re < 0.0) || !p.im.is_finite() {
            return Err(Error::UnstablePole { re: p.re, im: p.im });
        }
    }
    let tol = 1e-12 * scale;
    let mut used = [false; 3];
    for i in 0..3 {
        if poles[i].im.abs() <= tol || used[i] {
            continue;
        }
        let partner = (0..3).find(|&j| j != i && !used[j] && (poles[j] - poles[i].conj()).norm() <= tol);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return Err(Error::NonConjugatePoles),
        }
    }
    let [a, b, c] = poles;
    let k3 = -(a + b + c);
    let k2 = a * b + a * c + b * c;
    let k1 = -(a * b * c);
    TranslationGains::new(k1.re, k2.re, k3.re)
}

/// [`pole_place`] for real poles.
pub fn pole_place_real(poles: [f64; 3]) -> Result<TranslationGains> {
    pole_place(poles.map(|p| Complex::new(p, 0.0)))
}

/// Block companion pair `(A_o, C_o)`.
pub fn canonical_form() -> (Mat9, Mat3x9) {
    let z = Mat3::zeros();
    let i = Mat3::identity();
    let a = from_blocks([[z, z, z], [i, z, z], [z, i, z]]);
    let mut c = Mat3x9::zeros();
    c.fixed_view_mut::<3, 3>(0, 6).copy_from(&i);
    (a, c)
}

/// Closed-loop canonical error matrix `A_o − K_o C_o`.
pub fn closed_loop(gains: &TranslationGains) -> Mat9 {
    let (a, c) = canonical_form();
    a - gains.canonical_gain() * c
}

/// Solves `Aᵀ P + P A = −Q` by vectorization.
pub fn solve_lyapunov(a: &Mat9, q: &Mat9) -> Result<Mat9> {
    const N: usize = 9;
    let at = a.transpose();
    let mut big = DMatrix::<f64>::zeros(N * N, N * N);
    // vec(AᵀP) = (I ⊗ Aᵀ) vec(P), vec(PA) = (Aᵀ ⊗ I) vec(P), column-major.
    for col in 0..N {
        for row in 0..N {
            let r = col * N + row;
            for k in 0..N {
                big[(r, col * N + k)] += at[(row, k)];
                big[(r, k * N + row)] += a[(k, col)];
            }
        }
    }
    let rhs = DVector::from_iterator(N * N, q.iter().map(|x| -x));
    let sol = big.lu().solve(&rhs).ok_or(Error::Singular {
        what: "Lyapunov operator",
    })?;
    let p = Mat9::from_iterator(sol.iter().copied());
    Ok((p + p.transpose()) * 0.5)
}

fn symmetric_residual(m: &Mat9) -> f64 {
    (m - m.transpose()).abs().max() / m.abs().max().max(1.0)
}

fn max_symmetric_eigenvalue(m: &Mat9) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(s).eigenvalues.max()
}

/// Metric `P`, multiplier `ρ` and rate `λ` of a canonical-form contraction
/// certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionCertificate {
    pub p: Mat9,
    pub rho: f64,
    pub lambda: f64,
}

impl ContractionCertificate {
    /// `P` from `(A_cl + λI)ᵀ P + P (A_cl + λI) = −Q`, with `ρ` the least-squares
    /// fit of `P K_o ≈ ½ρ C_oᵀ`.
    ///
    /// With `Q = C_oᵀC_o` and a triple closed-loop pole at `−2λ`, `P K_o` is
    /// exactly `C_oᵀ` (`ρ = 2`), so `K_o = ½ρP⁻¹C_oᵀ` reproduces the placed
    /// gains and the LMI expression reduces to `−C_oᵀC_o`.
    pub fn from_lyapunov(gains: &TranslationGains, lambda: f64, q: &Mat9) -> Result<Self> {
        let shifted = closed_loop(gains) + Mat9::identity() * lambda;
        let p = solve_lyapunov(&shifted, q)?;
        let (_, c) = canonical_form();
        let ct = c.transpose();
        let pk = p * gains.canonical_gain();
        let rho = 2.0 * pk.dot(&ct) / ct.dot(&ct);
        Ok(Self { p, rho, lambda })
    }

    /// `Q = C_oᵀ C_o`.
    pub fn output_weight() -> Mat9 {
        let (_, c) = canonical_form();
        c.transpose() * c
    }

    pub fn is_positive_definite(&self) -> bool {
        SymmetricEigen::new((self.p + self.p.transpose()) * 0.5)
            .eigenvalues
            .min()
            > 0.0
    }

    pub fn condition_number(&self) -> f64 {
        let e = SymmetricEigen::new((self.p + self.p.transpose()) * 0.5).eigenvalues;
        e.max() / e.min()
    }

    /// `½ ρ P⁻¹ C_oᵀ`.
    pub fn implied_gain(&self) -> Result<Mat9x3> {
        let (_, c) = canonical_form();
        let p_inv = self.p.try_inverse().ok_or(Error::Singular { what: "certificate P" })?;
        Ok(p_inv * c.transpose() * (0.5 * self.rho))
    }
}

/// `A_oᵀP + PA_o + 2λP − ρC_oᵀC_o`, symmetrized.
pub fn lmi_expression(cert: &ContractionCertificate) -> Mat9 {
    let (a, c) = canonical_form();
    let p = &cert.p;
    let e = a.transpose() * p + p * a + p * (2.0 * cert.lambda) - c.transpose() * c * cert.rho;
    (e + e.transpose()) * 0.5
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LmiReport {
    /// Largest eigenvalue of the LMI expression; `≤ 0` certifies contraction.
    pub max_eigenvalue: f64,
    /// Largest entry of `|½ρP⁻¹C_oᵀ − K_o|`.
    pub gain_residual: f64,
}

/// Evaluates the contraction LMI for `cert` and cross-checks the implied gain
/// against `gains`.
pub fn verify_contraction_lmi(cert: &ContractionCertificate, gains: &TranslationGains) -> Result<LmiReport> {
    let residual = symmetric_residual(&cert.p);
    if residual > 1e-9 {
        return Err(Error::NotSymmetric {
            what: "certificate P",
            residual,
        });
    }
    let max_eigenvalue = max_symmetric_eigenvalue(&lmi_expression(cert));
    let gain_residual = (cert.implied_gain()? - gains.canonical_gain()).abs().max();
    Ok(LmiReport {
        max_eigenvalue,
        gain_residual,
    })
}

/// Largest eigenvalue of `(A_cl + λI)ᵀP + P(A_cl + λI)` for the given gains.
/// Nonpositive iff `P` certifies rate `λ` for the closed loop itself.
pub fn closed_loop_rate_residual(p: &Mat9, gains: &TranslationGains, lambda: f64) -> f64 {
    let f = closed_loop(gains) + Mat9::identity() * lambda;
    max_symmetric_eigenvalue(&(f.transpose() * p + p * f))
}

/// Smallest `ρ` (to relative precision `1e-10`) for which the LMI holds with
/// the given `P` and `λ`, if any below `rho_max`.
pub fn min_finsler_rho(p: &Mat9, lambda: f64, rho_max: f64) -> Option<f64> {
    let holds = |rho: f64| {
        let cert = ContractionCertificate { p: *p, rho, lambda };
        max_symmetric_eigenvalue(&lmi_expression(&cert)) <= 0.0
    };
    if holds(0.0) {
        return Some(0.0);
    }
    let mut hi = 1.0;
    while !holds(hi) {
        hi *= 2.0;
        if hi > rho_max {
            return None;
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

fn check_skew(m: &Mat3, what: &'static str) -> Result<()> {
    let residual = skew_residual(m);
    if residual.is_nan() || residual > SKEW_TOLERANCE {
        return Err(Error::NotSkew { what, residual });
    }
    Ok(())
}

/// Closed form of `Υ⁻¹` for attitude `R`, body rate `Ω = [ω]×` and `Ω̇`:
///
/// ```text
/// [[ 0,    0,     I     ],
///  [ 0,    I,     RΩRᵀ  ],
///  [ −Rᵀ, −ΩRᵀ,  −ΓRᵀ   ]],   Γ = Ω² − Ω̇
/// ```
pub fn upsilon_inverse_explicit(r: &Mat3, omega: &Mat3, omega_dot: &Mat3) -> Result<Mat9> {
    check_skew(omega, "Ω")?;
    check_skew(omega_dot, "Ω̇")?;
    let z = Mat3::zeros();
    let i = Mat3::identity();
    let rt = r.transpose();
    let gamma = omega * omega - omega_dot;
    Ok(from_blocks([
        [z, z, i],
        [z, i, r * omega * rt],
        [-rt, -omega * rt, -gamma * rt],
    ]))
}

/// Largest entry of `|OᵀO − I|` for which `O` is inverted by transposition.
const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;

/// Inverse of `𝒪`. An orthogonal `𝒪` (the case for every rotation) is
/// inverted by transposition, which adds no rounding; anything else goes
/// through LU.
fn invert_observability(o: &Mat9) -> Result<Mat9> {
    if (o.transpose() * o - Mat9::identity()).abs().max() <= ORTHOGONALITY_TOLERANCE {
        return Ok(o.transpose());
    }
    o.try_inverse().ok_or(Error::Singular {
        what: "observability matrix",
    })
}

/// `Υ⁻¹ = [γ₁ γ₂ γ₃]` from `γ₁ = 𝒪⁻¹[0; 0; I]`, `γ_{i+1} = Aγᵢ − γ̇ᵢ`, with the
/// time derivatives taken by central differences of step `h`.
pub fn upsilon_inverse_recursive<FA, FO>(a_fn: FA, obs_fn: FO, t: f64, h: f64) -> Result<Mat9>
where
    FA: Fn(f64) -> Mat9,
    FO: Fn(f64) -> Mat9,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidStep(h));
    }
    fn gamma<FA: Fn(f64) -> Mat9, FO: Fn(f64) -> Mat9>(
        i: usize,
        t: f64,
        h: f64,
        a_fn: &FA,
        obs_fn: &FO,
    ) -> Result<Mat9x3> {
        if i == 1 {
            let o_inv = invert_observability(&obs_fn(t))?;
            let mut e = Mat9x3::zeros();
            e.fixed_view_mut::<3, 3>(6, 0).copy_from(&Mat3::identity());
            return Ok(o_inv * e);
        }
        let prev = gamma(i - 1, t, h, a_fn, obs_fn)?;
        let ahead = gamma(i - 1, t + h, h, a_fn, obs_fn)?;
        let behind = gamma(i - 1, t - h, h, a_fn, obs_fn)?;
        Ok(a_fn(t) * prev - (ahead - behind) / (2.0 * h))
    }
    let mut out = Mat9::zeros();
    for i in 1..=3 {
        let g = gamma(i, t, h, &a_fn, &obs_fn)?;
        out.fixed_view_mut::<9, 3>(0, 3 * (i - 1)).copy_from(&g);
    }
    Ok(out)
}

/// Metric `M = Υᵀ P Υ` in the original error coordinates.
pub fn metric(r: &Mat3, omega: &Mat3, omega_dot: &Mat3, p: &Mat9) -> Result<Mat9> {
    let ups_inv = upsilon_inverse_explicit(r, omega, omega_dot)?;
    let ups = ups_inv.try_inverse().ok_or(Error::Singular {
        what: "coordinate change Υ⁻¹",
    })?;
    let m = ups.transpose() * p * ups;
    Ok((m + m.transpose()) * 0.5)
}
