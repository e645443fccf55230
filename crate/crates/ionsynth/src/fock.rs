//! Two-mode Fock-space representation: electronic levels, phonon index
//! types, the `(J, L)` relabeling by total quanta and imbalance, truncated
//! state vectors, and target-state coefficient tables.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Tolerance inside which an input coefficient table is silently
/// renormalized; beyond it the input is rejected.
pub const INPUT_NORM_TOL: f64 = 1e-9;

/// The two electronic ground levels of the Raman transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElectronicLevel {
    G1,
    G2,
}

impl ElectronicLevel {
    pub const ALL: [ElectronicLevel; 2] = [ElectronicLevel::G1, ElectronicLevel::G2];

    /// Position of the level block in the flat amplitude layout.
    pub fn index(self) -> usize {
        match self {
            ElectronicLevel::G1 => 0,
            ElectronicLevel::G2 => 1,
        }
    }
}

impl Default for ElectronicLevel {
    /// The protocol starts from `|g_2>|0>_x|0>_y`.
    fn default() -> Self {
        ElectronicLevel::G2
    }
}

/// Phonon occupation pair `(m, n)` for the x and y vibration modes.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
pub struct ModeIndex {
    /// Phonon count in the x mode.
    pub m: usize,
    /// Phonon count in the y mode.
    pub n: usize,
}

impl ModeIndex {
    pub fn new(m: usize, n: usize) -> Self {
        ModeIndex { m, n }
    }
}

/// `|J, L>` label with `2J = m + n` (total quanta) and `2L = m - n`
/// (imbalance). Doubled values are stored so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JLIndex {
    pub two_j: i64,
    pub two_l: i64,
}

impl JLIndex {
    /// Build a validated label: `|2L| <= 2J` and matching parity.
    pub fn try_new(two_j: i64, two_l: i64) -> Option<Self> {
        if two_j < 0 || two_l.abs() > two_j || (two_j - two_l) % 2 != 0 {
            return None;
        }
        Some(JLIndex { two_j, two_l })
    }
}

/// `|m>_x|n>_y -> |J, L>` with `J = (m+n)/2`, `L = (m-n)/2`.
pub fn mn_to_jl(idx: ModeIndex) -> JLIndex {
    JLIndex {
        two_j: (idx.m + idx.n) as i64,
        two_l: idx.m as i64 - idx.n as i64,
    }
}

/// `|J, L> -> |J+L>_x|J-L>_y`, the inverse of [`mn_to_jl`].
pub fn jl_to_mn(idx: JLIndex) -> ModeIndex {
    debug_assert!(idx.two_l.abs() <= idx.two_j && (idx.two_j - idx.two_l) % 2 == 0);
    ModeIndex {
        m: ((idx.two_j + idx.two_l) / 2) as usize,
        n: ((idx.two_j - idx.two_l) / 2) as usize,
    }
}

/// Target coefficient table `C[m][n]` for `0 <= m <= M`, `0 <= n <= N`,
/// normalized to unit l2 norm.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    m_max: usize,
    n_max: usize,
    coeffs: Vec<Complex64>,
}

impl TargetSpec {
    /// Validate and build a target. A table whose norm is within
    /// [`INPUT_NORM_TOL`] of 1 is silently renormalized; anything farther
    /// off is rejected as unnormalized input.
    pub fn new(
        m_max: usize,
        n_max: usize,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, Error> {
        let expected = (m_max + 1) * (n_max + 1);
        assert_eq!(
            coeffs.len(),
            expected,
            "coefficient table must hold (M+1)(N+1) entries"
        );
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite {
                context: "target coefficients",
            });
        }
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > INPUT_NORM_TOL {
            return Err(Error::Unnormalized {
                norm,
                tol: INPUT_NORM_TOL,
            });
        }
        let coeffs = coeffs.into_iter().map(|c| c / norm).collect();
        Ok(TargetSpec {
            m_max,
            n_max,
            coeffs,
        })
    }

    /// Build from a sparse list of `(m, n, coefficient)` entries; absent
    /// entries are zero.
    pub fn from_entries(
        m_max: usize,
        n_max: usize,
        entries: &[(usize, usize, Complex64)],
    ) -> Result<Self, Error> {
        let mut coeffs = vec![Complex64::ZERO; (m_max + 1) * (n_max + 1)];
        for &(m, n, c) in entries {
            if m > m_max || n > n_max {
                return Err(Error::TruncationExceeded {
                    nx: m,
                    ny: n,
                    cap_x: m_max,
                    cap_y: n_max,
                });
            }
            coeffs[m * (n_max + 1) + n] += c;
        }
        TargetSpec::new(m_max, n_max, coeffs)
    }

    /// Bypasses normalization checks; for exercising downstream guards.
    #[doc(hidden)]
    pub fn unchecked(m_max: usize, n_max: usize, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), (m_max + 1) * (n_max + 1));
        TargetSpec {
            m_max,
            n_max,
            coeffs,
        }
    }

    /// Draw a Haar-like random target: i.i.d. standard complex Gaussian
    /// entries, l2-normalized (uniform on the coefficient sphere).
    pub fn random<R: rand::Rng + ?Sized>(m_max: usize, n_max: usize, rng: &mut R) -> Self {
        use rand_distr::StandardNormal;
        let len = (m_max + 1) * (n_max + 1);
        let mut coeffs: Vec<Complex64> = (0..len)
            .map(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            })
            .collect();
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for c in &mut coeffs {
            *c /= norm;
        }
        TargetSpec {
            m_max,
            n_max,
            coeffs,
        }
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficient `C[m][n]`; zero outside the caps.
    pub fn coeff(&self, m: usize, n: usize) -> Complex64 {
        if m > self.m_max || n > self.n_max {
            Complex64::ZERO
        } else {
            self.coeffs[m * (self.n_max + 1) + n]
        }
    }

    /// The target as a state vector on the `|g_1>` manifold at the given
    /// truncation (which must contain the caps).
    pub fn to_state(&self, cap_x: usize, cap_y: usize) -> Result<StateVector, Error> {
        if cap_x < self.m_max || cap_y < self.n_max {
            return Err(Error::TruncationExceeded {
                nx: self.m_max,
                ny: self.n_max,
                cap_x,
                cap_y,
            });
        }
        let mut state = StateVector::zero(cap_x, cap_y);
        for m in 0..=self.m_max {
            for n in 0..=self.n_max {
                state.set(ElectronicLevel::G1, m, n, self.coeff(m, n));
            }
        }
        Ok(state)
    }
}

/// Relabel the coefficient table as `d[J][L] = C[J+L][J-L]`. Every in-cap
/// entry appears; positions with `m > M` or `n > N` are absent.
pub fn coeffs_to_d(spec: &TargetSpec) -> BTreeMap<JLIndex, Complex64> {
    let mut d = BTreeMap::new();
    for m in 0..=spec.m_max() {
        for n in 0..=spec.n_max() {
            d.insert(mn_to_jl(ModeIndex::new(m, n)), spec.coeff(m, n));
        }
    }
    d
}

/// Dense complex amplitudes over `(level, n_x, n_y)` on a truncated
/// two-mode Fock space. Layout is level-major with `n_y` fastest:
/// `flat = level * (cap_x+1)(cap_y+1) + n_x * (cap_y+1) + n_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    cap_x: usize,
    cap_y: usize,
    amp: Vec<Complex64>,
}

impl StateVector {
    pub fn zero(cap_x: usize, cap_y: usize) -> Self {
        StateVector {
            cap_x,
            cap_y,
            amp: vec![Complex64::ZERO; 2 * (cap_x + 1) * (cap_y + 1)],
        }
    }

    /// Unit vector with a single amplitude 1 at `(level, m, n)`.
    pub fn basis_state(
        level: ElectronicLevel,
        idx: ModeIndex,
        cap_x: usize,
        cap_y: usize,
    ) -> Result<Self, Error> {
        if idx.m > cap_x || idx.n > cap_y {
            return Err(Error::TruncationExceeded {
                nx: idx.m,
                ny: idx.n,
                cap_x,
                cap_y,
            });
        }
        let mut state = StateVector::zero(cap_x, cap_y);
        state.set(level, idx.m, idx.n, Complex64::ONE);
        Ok(state)
    }

    /// The protocol's initial state `|g_2>|0>_x|0>_y`.
    pub fn initial(cap_x: usize, cap_y: usize) -> Self {
        StateVector::basis_state(ElectronicLevel::G2, ModeIndex::new(0, 0), cap_x, cap_y)
            .expect("ground state always within caps")
    }

    pub fn cap_x(&self) -> usize {
        self.cap_x
    }

    pub fn cap_y(&self) -> usize {
        self.cap_y
    }

    /// Number of phonon basis states per electronic level.
    pub fn phonon_dim(&self) -> usize {
        (self.cap_x + 1) * (self.cap_y + 1)
    }

    pub fn flat(&self, level: ElectronicLevel, nx: usize, ny: usize) -> usize {
        debug_assert!(nx <= self.cap_x && ny <= self.cap_y);
        level.index() * self.phonon_dim() + nx * (self.cap_y + 1) + ny
    }

    pub fn get(&self, level: ElectronicLevel, nx: usize, ny: usize) -> Complex64 {
        self.amp[self.flat(level, nx, ny)]
    }

    pub fn set(&mut self, level: ElectronicLevel, nx: usize, ny: usize, value: Complex64) {
        let i = self.flat(level, nx, ny);
        self.amp[i] = value;
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amp
    }

    /// Iterate `(level, n_x, n_y, amplitude)` in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (ElectronicLevel, usize, usize, Complex64)> + '_ {
        let ny_dim = self.cap_y + 1;
        let phonon = self.phonon_dim();
        self.amp.iter().enumerate().map(move |(i, &a)| {
            let level = ElectronicLevel::ALL[i / phonon];
            let rest = i % phonon;
            (level, rest / ny_dim, rest % ny_dim, a)
        })
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amp {
                *a /= n;
            }
        }
    }

    /// `<self|other>`; errors on mismatched truncations.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64, Error> {
        if self.cap_x != other.cap_x || self.cap_y != other.cap_y {
            return Err(Error::CapMismatch {
                a: (self.cap_x, self.cap_y),
                b: (other.cap_x, other.cap_y),
            });
        }
        Ok(self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Total `|g_2>` population outside the motional ground state.
    pub fn g2_offsite_population(&self) -> f64 {
        let mut total = 0.0;
        for nx in 0..=self.cap_x {
            for ny in 0..=self.cap_y {
                if nx == 0 && ny == 0 {
                    continue;
                }
                total += self.get(ElectronicLevel::G2, nx, ny).norm_sqr();
            }
        }
        total
    }
}

#[derive(Serialize, Deserialize)]
struct AmplitudeJson {
    level: ElectronicLevel,
    nx: usize,
    ny: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct StateVectorJson {
    cap_x: usize,
    cap_y: usize,
    amplitudes: Vec<AmplitudeJson>,
}

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        // exact zeros are omitted from the wire form
        let amplitudes = self
            .iter()
            .filter(|(_, _, _, a)| a.norm_sqr() > 0.0)
            .map(|(level, nx, ny, a)| AmplitudeJson {
                level,
                nx,
                ny,
                re: a.re,
                im: a.im,
            })
            .collect();
        StateVectorJson {
            cap_x: self.cap_x,
            cap_y: self.cap_y,
            amplitudes,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = StateVectorJson::deserialize(deserializer)?;
        let mut state = StateVector::zero(raw.cap_x, raw.cap_y);
        for a in raw.amplitudes {
            if a.nx > raw.cap_x || a.ny > raw.cap_y {
                return Err(serde::de::Error::custom(format!(
                    "amplitude index ({}, {}) outside caps ({}, {})",
                    a.nx, a.ny, raw.cap_x, raw.cap_y
                )));
            }
            state.set(a.level, a.nx, a.ny, Complex64::new(a.re, a.im));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn mn_to_jl_examples() {
        assert_eq!(mn_to_jl(ModeIndex::new(0, 0)), JLIndex { two_j: 0, two_l: 0 });
        // |1/2, -1/2> after the (0,1) pulse
        assert_eq!(mn_to_jl(ModeIndex::new(0, 1)), JLIndex { two_j: 1, two_l: -1 });
        // |1/2, +1/2> after the (1,0) pulse
        assert_eq!(mn_to_jl(ModeIndex::new(1, 0)), JLIndex { two_j: 1, two_l: 1 });
    }

    #[test]
    fn jl_to_mn_examples() {
        assert_eq!(jl_to_mn(JLIndex { two_j: 0, two_l: 0 }), ModeIndex::new(0, 0));
        assert_eq!(jl_to_mn(JLIndex { two_j: 1, two_l: -1 }), ModeIndex::new(0, 1));
        assert_eq!(jl_to_mn(JLIndex { two_j: 4, two_l: 0 }), ModeIndex::new(2, 2));
    }

    #[test]
    fn jl_round_trip_exhaustive() {
        for m in 0..=20 {
            for n in 0..=20 {
                let idx = ModeIndex::new(m, n);
                let jl = mn_to_jl(idx);
                assert_eq!((jl.two_j - jl.two_l).rem_euclid(2), 0, "parity at {idx:?}");
                assert_eq!(jl_to_mn(jl), idx);
            }
        }
    }

    #[test]
    fn jl_try_new_rejects_invalid() {
        assert!(JLIndex::try_new(2, 1).is_none()); // parity mismatch
        assert!(JLIndex::try_new(2, -4).is_none()); // |L| > J
        assert!(JLIndex::try_new(-1, 0).is_none());
        assert!(JLIndex::try_new(3, -1).is_some());
    }

    #[test]
    fn coeffs_to_d_single_entry() {
        let spec =
            TargetSpec::from_entries(0, 0, &[(0, 0, Complex64::ONE)]).unwrap();
        let d = coeffs_to_d(&spec);
        assert_eq!(d.len(), 1);
        assert_eq!(d[&JLIndex { two_j: 0, two_l: 0 }], Complex64::ONE);
    }

    #[test]
    fn coeffs_to_d_two_phonon_superposition() {
        let amp = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let spec =
            TargetSpec::from_entries(1, 1, &[(0, 1, amp), (1, 0, amp)]).unwrap();
        let d = coeffs_to_d(&spec);
        assert_eq!(d[&JLIndex { two_j: 1, two_l: -1 }], amp);
        assert_eq!(d[&JLIndex { two_j: 1, two_l: 1 }], amp);
        // zero entries within caps are present
        assert_eq!(d.len(), 4);
    }

    #[test]
    fn coeffs_to_d_dense_diagonals() {
        let c = Complex64::new(0.5, 0.0);
        let spec = TargetSpec::new(1, 1, vec![c; 4]).unwrap();
        let d = coeffs_to_d(&spec);
        assert_eq!(d.len(), 4);
        let mut diagonals: Vec<i64> = d.keys().map(|k| k.two_j).collect();
        diagonals.sort_unstable();
        diagonals.dedup();
        assert_eq!(diagonals, vec![0, 1, 2]);
        // relabeling copies values bit-for-bit, so the l2 norm is preserved
        for (&jl, &v) in &d {
            let mn = jl_to_mn(jl);
            assert_eq!(v, spec.coeff(mn.m, mn.n));
        }
        let norm: f64 = d.values().map(|v| v.norm_sqr()).sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn basis_state_places_single_amplitude() {
        let s = StateVector::basis_state(
            ElectronicLevel::G2,
            ModeIndex::new(0, 0),
            2,
            2,
        )
        .unwrap();
        assert_eq!(s.get(ElectronicLevel::G2, 0, 0), Complex64::ONE);
        assert_abs_diff_eq!(s.norm(), 1.0);
        let nonzero = s.iter().filter(|(_, _, _, a)| a.norm_sqr() > 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn basis_state_beyond_cap_errors() {
        let err = StateVector::basis_state(
            ElectronicLevel::G1,
            ModeIndex::new(3, 0),
            2,
            4,
        )
        .unwrap_err();
        assert!(matches!(err, Error::TruncationExceeded { .. }));
    }

    #[test]
    fn flat_index_is_bijective() {
        for (cap_x, cap_y) in [(0, 0), (1, 3), (3, 1), (2, 2)] {
            let s = StateVector::zero(cap_x, cap_y);
            let mut seen = vec![false; 2 * (cap_x + 1) * (cap_y + 1)];
            for level in ElectronicLevel::ALL {
                for nx in 0..=cap_x {
                    for ny in 0..=cap_y {
                        let i = s.flat(level, nx, ny);
                        assert!(!seen[i], "collision at ({level:?}, {nx}, {ny})");
                        seen[i] = true;
                    }
                }
            }
            assert!(seen.iter().all(|&v| v));
        }
    }

    #[test]
    fn target_spec_renormalizes_small_drift() {
        let c = Complex64::new(0.5 * (1.0 + 4e-10), 0.0);
        let spec = TargetSpec::new(1, 1, vec![c; 4]).unwrap();
        let norm: f64 = (0..2)
            .flat_map(|m| (0..2).map(move |n| (m, n)))
            .map(|(m, n)| spec.coeff(m, n).norm_sqr())
            .sum();
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn target_spec_rejects_large_drift() {
        let c = Complex64::new(0.51, 0.0);
        let err = TargetSpec::new(1, 1, vec![c; 4]).unwrap_err();
        assert!(matches!(err, Error::Unnormalized { .. }));
    }

    #[test]
    fn target_spec_rejects_nan() {
        let err = TargetSpec::new(0, 0, vec![Complex64::new(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    proptest! {
        #[test]
        fn random_specs_are_normalized(seed in 0u64..1000, m_max in 0usize..4, n_max in 0usize..4) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spec = TargetSpec::random(m_max, n_max, &mut rng);
            let norm: f64 = (0..=m_max)
                .flat_map(|m| (0..=n_max).map(move |n| (m, n)))
                .map(|(m, n)| spec.coeff(m, n).norm_sqr())
                .sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }

        #[test]
        fn relabeling_preserves_values(seed in 0u64..1000) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let spec = TargetSpec::random(2, 3, &mut rng);
            let d = coeffs_to_d(&spec);
            prop_assert_eq!(d.len(), 12);
            for (&jl, &v) in &d {
                let mn = jl_to_mn(jl);
                prop_assert_eq!(v, spec.coeff(mn.m, mn.n));
            }
        }
    }
}
