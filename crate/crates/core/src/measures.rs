//! Negativity, mutual information, classical correlation and discord of the
//! second-order two-detector state.
//!
//! Entropies are in nats.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::CorrelationSet;
use crate::error::{Error, Result};
use crate::specfun::{binary_entropy, xlogx, CLAMP_BAND};

/// Entropies use the natural logarithm.
pub const ENTROPY_BASE_E: bool = true;

/// 4×4 density matrix in the basis `|g_A g_B⟩, |g_A e_B⟩, |e_A g_B⟩, |e_A e_B⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub matrix: [[Complex64; 4]; 4],
}

impl ReducedState {
    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.matrix[i][i]).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..4).all(|i| (0..4).all(|j| (self.matrix[i][j] - self.matrix[j][i].conj()).norm() <= tol))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PtEigenvalues {
    pub e_plus: f64,
    pub e_minus: f64,
    pub ep_plus: f64,
    pub ep_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NegativityMode {
    Exact,
    Perturbative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMeasures {
    pub negativity_exact: f64,
    pub negativity_pert: f64,
    pub mutual_info: f64,
    pub classical_j: f64,
    pub discord: f64,
    /// `(α1, α3, α4)`
    pub alpha: [f64; 3],
    pub s1: f64,
    pub s2: f64,
    pub pt: PtEigenvalues,
}

fn p0(c: &CorrelationSet) -> f64 {
    1.0 - c.x_aa - c.x_bb
}

fn entropy(x: f64, what: &str) -> Result<f64> {
    binary_entropy(x).map_err(|_| Error::InvalidState(format!("{what} = {x} outside [0, 1]")))
}

/// Places the entries: `1 − X_AA − X_BB`, `X_AA`, `X_BB` on the diagonal of
/// the first three states, `M*` at (1,4), `M` at (4,1), `X_AB` at (2,3).
pub fn build_state(c: &CorrelationSet) -> Result<ReducedState> {
    let p0 = p0(c);
    if !(p0 >= 0.0) {
        return Err(Error::InvalidState(format!("1 - x_aa - x_bb = {p0} < 0")));
    }
    let z = Complex64::default();
    let r = |x: f64| Complex64::new(x, 0.0);
    let x_ab = r(c.x_ab);
    let matrix = [
        [r(p0), z, z, c.m_ab.conj()],
        [z, r(c.x_bb), x_ab, z],
        [z, x_ab.conj(), r(c.x_aa), z],
        [c.m_ab, z, z, z],
    ];
    Ok(ReducedState { matrix })
}

/// Eigenvalues of the partial transpose; only `ep_minus` can be negative.
pub fn pt_eigenvalues(c: &CorrelationSet) -> PtEigenvalues {
    let p0 = p0(c);
    let r = (p0 * p0 + 4.0 * c.x_ab * c.x_ab).sqrt();
    let s = 0.5 * (c.x_aa + c.x_bb);
    let d = c.x_aa - c.x_bb;
    let rp = (d * d + 4.0 * c.m_ab.norm_sqr()).sqrt();
    PtEigenvalues {
        e_plus: 0.5 * (p0 + r),
        e_minus: 0.5 * (p0 - r),
        ep_plus: s + 0.5 * rp,
        ep_minus: s - 0.5 * rp,
    }
}

pub fn negativity(c: &CorrelationSet, mode: NegativityMode) -> f64 {
    match mode {
        NegativityMode::Exact => (-pt_eigenvalues(c).ep_minus).max(0.0),
        NegativityMode::Perturbative => (c.m_ab.norm() - 0.5 * (c.x_aa + c.x_bb)).max(0.0),
    }
}

/// `(α1, α3, α4)`; `α2 = O(λ⁴)` is dropped.
pub fn alphas(c: &CorrelationSet) -> Result<[f64; 3]> {
    let a1 = p0(c);
    let d = c.x_aa - c.x_bb;
    let r = (d * d + 4.0 * c.x_ab * c.x_ab).sqrt();
    let s = c.x_aa + c.x_bb;
    let mut out = [a1, 0.5 * (s + r), 0.5 * (s - r)];
    for a in &mut out {
        if *a < 0.0 {
            if *a > -CLAMP_BAND {
                *a = 0.0;
            } else {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {a:e}; |x_ab|^2 > x_aa x_bb upstream?"
                )));
            }
        }
    }
    Ok(out)
}

fn alpha_sum(a: &[f64; 3]) -> f64 {
    a.iter().map(|&x| xlogx(x)).sum()
}

pub fn mutual_information(c: &CorrelationSet) -> Result<(f64, [f64; 3])> {
    let a = alphas(c)?;
    let i = entropy(c.x_aa, "x_aa")? + entropy(c.x_bb, "x_bb")? + alpha_sum(&a);
    Ok((i, a))
}

/// Closed-form conditional entropies `(S1, S2)`.
pub fn conditional_entropies(c: &CorrelationSet) -> Result<(f64, f64)> {
    let p0 = p0(c);
    let d = c.x_aa - c.x_bb;
    let s1 = entropy(
        0.5 * (1.0 + (p0 * p0 + 4.0 * c.x_ab * c.x_ab).sqrt()),
        "S1 argument",
    )?;
    let s2 = entropy(
        0.5 * (1.0 + (d * d + 4.0 * c.m_ab.norm_sqr()).sqrt()),
        "S2 argument",
    )?;
    Ok((s1, s2))
}

/// Every measure at once.
pub fn discord(c: &CorrelationSet) -> Result<CorrelationMeasures> {
    build_state(c)?;
    let (mutual_info, alpha) = mutual_information(c)?;
    let (s1, s2) = conditional_entropies(c)?;
    let smin = s1.min(s2);
    let classical_j = entropy(c.x_bb, "x_bb")? - smin;
    let discord = entropy(c.x_aa, "x_aa")? + alpha_sum(&alpha) + smin;
    Ok(CorrelationMeasures {
        negativity_exact: negativity(c, NegativityMode::Exact),
        negativity_pert: negativity(c, NegativityMode::Perturbative),
        mutual_info,
        classical_j,
        discord,
        alpha,
        s1,
        s2,
        pt: pt_eigenvalues(c),
    })
}

/// Conditional entropy of B after the projective measurement on A along
/// `|Π+⟩ = (cos θ/2, e^{iφ} sin θ/2)`, `|Π−⟩ = (sin θ/2, −e^{iφ} cos θ/2)`.
pub fn conditional_entropy_at(state: &ReducedState, theta: f64, phi: f64) -> f64 {
    let (s, c) = (0.5 * theta).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let plus = [Complex64::new(c, 0.0), e * s];
    let minus = [Complex64::new(s, 0.0), -e * c];
    [plus, minus]
        .iter()
        .map(|v| outcome_entropy(state, v))
        .sum()
}

/// `p·H((1+Δ)/2)` for one outcome; the conditional B state is
/// `⟨π|ρ|π⟩` with the partial inner product taken on A.
fn outcome_entropy(state: &ReducedState, v: &[Complex64; 2]) -> f64 {
    let m = &state.matrix;
    let mut b = [[Complex64::default(); 2]; 2];
    for (bi, row) in b.iter_mut().enumerate() {
        for (bj, cell) in row.iter_mut().enumerate() {
            for a in 0..2 {
                for a2 in 0..2 {
                    *cell += v[a].conj() * m[2 * a + bi][2 * a2 + bj] * v[a2];
                }
            }
        }
    }
    let (a, d) = (b[0][0].re, b[1][1].re);
    let p = a + d;
    if p <= 0.0 {
        return 0.0;
    }
    // The second-order state is only positive up to O(λ⁴); clamp Δ.
    let delta = (((a - d) * (a - d) + 4.0 * b[0][1].norm_sqr()).sqrt() / p).min(1.0);
    p * binary_entropy(0.5 * (1.0 + delta)).unwrap_or(0.0)
}

/// Minimum of the measured conditional entropy over a `θ ∈ [0, π]`,
/// `φ ∈ [0, 2π)` grid. Test oracle for the closed-form `min(S1, S2)`.
pub fn brute_force_conditional_entropy(
    c: &CorrelationSet,
    theta_steps: usize,
    phi_steps: usize,
) -> Result<f64> {
    if theta_steps < 2 || phi_steps < 1 {
        return Err(Error::InvalidParams(
            "need theta_steps >= 2 and phi_steps >= 1".into(),
        ));
    }
    let state = build_state(c)?;
    let mut best = f64::INFINITY;
    for i in 0..theta_steps {
        let theta = std::f64::consts::PI * i as f64 / (theta_steps - 1) as f64;
        for j in 0..phi_steps {
            let phi = std::f64::consts::TAU * j as f64 / phi_steps as f64;
            best = best.min(conditional_entropy_at(&state, theta, phi));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn corrs(x_aa: f64, x_bb: f64, x_ab: f64, m: Complex64) -> CorrelationSet {
        CorrelationSet::new(x_aa, x_bb, x_ab, m)
    }

    fn zero() -> CorrelationSet {
        corrs(0.0, 0.0, 0.0, Complex64::default())
    }

    /// Von Neumann entropy from a generic Hermitian eigensolver.
    fn vn_entropy(state: &ReducedState) -> f64 {
        let m = Matrix4::from_fn(|i, j| {
            nalgebra::Complex::new(state.matrix[i][j].re, state.matrix[i][j].im)
        });
        m.symmetric_eigenvalues()
            .iter()
            .map(|&l| -xlogx(l.max(0.0)))
            .sum()
    }

    fn mi_oracle(c: &CorrelationSet) -> f64 {
        let s = build_state(c).unwrap();
        let h = |x: f64| binary_entropy(x).unwrap();
        h(c.x_aa) + h(c.x_bb) - vn_entropy(&s)
    }

    #[test]
    fn ground_state() {
        let s = build_state(&zero()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(s.matrix[i][j], Complex64::new(want, 0.0));
            }
        }
        let pt = pt_eigenvalues(&zero());
        assert_eq!(
            (pt.e_plus, pt.e_minus, pt.ep_plus, pt.ep_minus),
            (1.0, 0.0, 0.0, 0.0)
        );
        let m = discord(&zero()).unwrap();
        assert_eq!((m.discord, m.classical_j, m.mutual_info), (0.0, 0.0, 0.0));
        assert_eq!(brute_force_conditional_entropy(&zero(), 5, 4).unwrap(), 0.0);
    }

    #[test]
    fn layout_trace_hermitian() {
        let c = corrs(0.01, 0.008, 0.004, Complex64::new(0.003, -0.002));
        let s = build_state(&c).unwrap();
        assert_eq!(s.trace(), Complex64::new(1.0, 0.0));
        assert!(s.is_hermitian(1e-14));
        assert_eq!(s.matrix[0][3], c.m_ab.conj());
        assert_eq!(s.matrix[3][0], c.m_ab);
        assert_eq!(s.matrix[1][2].re, c.x_ab);
        let nonzero = s
            .matrix
            .iter()
            .flatten()
            .filter(|z| z.norm() != 0.0)
            .count();
        assert_eq!(nonzero, 7); // (4,4) is zero by construction
        assert!(build_state(&corrs(0.6, 0.5, 0.0, Complex64::default())).is_err());
    }

    #[test]
    fn axis_state_has_equal_coherence_and_population() {
        let p = 0.007;
        let s = build_state(&corrs(p, p, p, Complex64::new(0.001, 0.0))).unwrap();
        assert_eq!(s.matrix[1][2], s.matrix[1][1]);
    }

    #[test]
    fn negativity_examples() {
        let c = corrs(0.01, 0.01, 0.0, Complex64::default());
        assert_eq!(negativity(&c, NegativityMode::Exact), 0.0);
        assert_eq!(negativity(&c, NegativityMode::Perturbative), 0.0);
        let c = corrs(0.0, 0.0, 0.0, Complex64::new(0.01, 0.0));
        assert_eq!(negativity(&c, NegativityMode::Exact), 0.01);
        assert_eq!(negativity(&c, NegativityMode::Perturbative), 0.01);
        // |M|² = X_AA X_BB: on the Peres–Horodecki boundary
        let c = corrs(0.004, 0.001, 0.0, Complex64::new(0.002, 0.0));
        let pt = pt_eigenvalues(&c);
        assert!(pt.ep_minus.abs() < 1e-18);
        assert!(negativity(&c, NegativityMode::Exact) < 1e-18);
    }

    #[test]
    fn mutual_information_examples() {
        let p = 0.01;
        let h = |x: f64| binary_entropy(x).unwrap();
        let (i, a) = mutual_information(&corrs(p, p, 0.0, Complex64::default())).unwrap();
        let want = 2.0 * h(p) + (1.0 - 2.0 * p) * (1.0 - 2.0 * p).ln() + 2.0 * p * p.ln();
        assert!((i - want).abs() < 1e-15);
        assert_eq!(a[1], p);
        assert_eq!(a[2], p);
        assert!((i - mi_oracle(&corrs(p, p, 0.0, Complex64::default()))).abs() < 1e-12);

        let c = corrs(p, p, p, Complex64::default());
        let (i, a) = mutual_information(&c).unwrap();
        assert!((a[1] - 2.0 * p).abs() < 1e-18 && a[2] == 0.0);
        let want = 2.0 * h(p) + (1.0 - 2.0 * p) * (1.0 - 2.0 * p).ln() + 2.0 * p * (2.0 * p).ln();
        assert!((i - want).abs() < 1e-15);
        assert!((i - mi_oracle(&c)).abs() < 1e-12);

        assert_eq!(mutual_information(&zero()).unwrap().0, 0.0);
    }

    #[test]
    fn negative_alpha_rejected() {
        // Cauchy–Schwarz violated upstream
        assert!(matches!(
            mutual_information(&corrs(0.01, 0.01, 0.02, Complex64::default())),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn product_structure_discord_is_fourth_order() {
        // With no coherences the closed form leaves D = O(X²) rather than 0:
        // the |ee⟩ population is absent from the second-order state.
        let d = |x: f64| {
            discord(&corrs(x, x, 0.0, Complex64::default()))
                .unwrap()
                .discord
        };
        let (a, b) = (d(0.001), d(0.002));
        assert!(a > 0.0 && a < 1e-5);
        let ratio = b / a;
        assert!((ratio - 4.0).abs() < 0.05, "D(2x)/D(x) = {ratio}");
    }

    #[test]
    fn optimal_phase_branch_for_real_entries() {
        // Real X_AB and M_AB: the minimum over the φ grid sits on φ = 0 or π.
        let c = corrs(0.01, 0.006, 0.005, Complex64::new(0.004, 0.0));
        let s = build_state(&c).unwrap();
        let grid = brute_force_conditional_entropy(&c, 181, 72).unwrap();
        let on_axis = (0..181)
            .map(|i| std::f64::consts::PI * i as f64 / 180.0)
            .flat_map(|t| [0.0, std::f64::consts::PI].map(|p| conditional_entropy_at(&s, t, p)))
            .fold(f64::INFINITY, f64::min);
        assert!((grid - on_axis).abs() < 1e-15);
    }

    #[test]
    fn half_has_log_two() {
        assert!((binary_entropy(0.5).unwrap() - LN_2).abs() < 1e-16);
    }

    fn valid_corrs() -> impl Strategy<Value = CorrelationSet> {
        (
            1e-4f64..0.04,
            1e-4f64..0.04,
            -1.0f64..1.0,
            0.0f64..2.0,
            0.0f64..std::f64::consts::TAU,
        )
            .prop_map(|(aa, bb, t, mr, ph)| {
                let g = (aa * bb).sqrt();
                corrs(aa, bb, t * g, Complex64::from_polar(mr * g, ph))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn i_equals_j_plus_d(c in valid_corrs()) {
            let m = discord(&c).unwrap();
            prop_assert!((m.mutual_info - m.classical_j - m.discord).abs() < 1e-12);
            prop_assert!(m.mutual_info >= 0.0);
            prop_assert!((m.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn pt_sum_and_sign(c in valid_corrs()) {
            let pt = pt_eigenvalues(&c);
            prop_assert!((pt.e_plus + pt.e_minus + pt.ep_plus + pt.ep_minus - 1.0).abs() < 1e-12);
            // e_− = −|X_AB|²/p0 + O(λ⁶): negative, but only at fourth order
            prop_assert!(pt.e_plus >= 0.0 && pt.ep_plus >= 0.0);
            prop_assert!(pt.e_minus >= -2.0 * c.x_ab * c.x_ab);
        }

        #[test]
        fn entanglement_flag_matches_ppt_condition(c in valid_corrs()) {
            let entangled = negativity(&c, NegativityMode::Exact) > 0.0;
            prop_assert_eq!(entangled, c.m_ab.norm_sqr() > c.x_aa * c.x_bb);
        }

        #[test]
        fn depends_only_on_moduli(c in valid_corrs(), chi in 0.0f64..std::f64::consts::TAU) {
            let mut r = c.clone();
            r.m_ab *= Complex64::from_polar(1.0, chi);
            r.x_ab = -r.x_ab;
            let (a, b) = (discord(&c).unwrap(), discord(&r).unwrap());
            prop_assert_eq!(a.s1, b.s1);
            prop_assert!((a.s2 - b.s2).abs() < 1e-15);
            prop_assert_eq!(a.mutual_info, b.mutual_info);
            prop_assert!((a.negativity_exact - b.negativity_exact).abs() < 1e-16);
        }
    }

    #[test]
    fn negativity_modes_difference_scaling() {
        // The exact and perturbative forms differ by |M| − √(|M|² + (X_AA−X_BB)²/4),
        // which is O(λ²) for unequal populations and vanishes when they match.
        let shape = (0.4, 0.3, 0.1, Complex64::new(0.5, 0.2));
        let diff = |l: f64, bb: f64| {
            let s = l * l;
            let c = corrs(shape.0 * s, bb * s, shape.2 * s, shape.3 * s);
            (negativity(&c, NegativityMode::Exact) - negativity(&c, NegativityMode::Perturbative))
                .abs()
        };
        for l in [0.05, 0.1, 0.2] {
            let s = l * l;
            let m = shape.3.norm() * s;
            let d = (shape.0 - shape.1) * s;
            let want = (m * m + 0.25 * d * d).sqrt() - m;
            assert!((diff(l, shape.1) - want).abs() < 1e-15);
            assert!(diff(l, shape.0) < 1e-16);
        }
        let r = diff(0.2, shape.1) / diff(0.1, shape.1);
        assert!((r - 4.0).abs() < 1e-6, "{r}");
    }
}
