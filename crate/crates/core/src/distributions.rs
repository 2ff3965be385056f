//! The local invariant distributions evaluated on jets, in both the
//! partial-derivative form and the sector-weighted form, together with their
//! linear relations.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::jets::{ComplexJet, SaddleModel};
use crate::special::{beta_like_rat, binom_rat, binom_u64, RootsOfUnity};

/// Which family a distribution index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistKind {
    /// Indexed by the derivative slot `0 <= j <= min(k, m-1)`.
    PartialJ,
    /// Indexed by the angular sector `0 <= l < 2m`.
    SectorL,
}

/// A validated index `(m, k, j-or-l)` into one of the two families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistIndex {
    pub m: u32,
    pub k: u32,
    pub j_or_l: u32,
    pub kind: DistKind,
}

impl DistIndex {
    pub fn new(m: u32, k: u32, j_or_l: u32, kind: DistKind) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("m = {m} must be >= 2")));
        }
        match kind {
            DistKind::PartialJ => {
                if j_or_l > k.min(m - 1) {
                    return Err(Error::OutOfRange(format!(
                        "j = {j_or_l} exceeds min(k, m-1) = {}",
                        k.min(m - 1)
                    )));
                }
            }
            DistKind::SectorL => {
                if j_or_l >= 2 * m {
                    return Err(Error::OutOfRange(format!(
                        "l = {j_or_l} exceeds 2m - 1 = {}",
                        2 * m - 1
                    )));
                }
            }
        }
        Ok(DistIndex { m, k, j_or_l, kind })
    }

    /// True when the index has no effect on sector regularity: `j = m-1` or
    /// `j = k - (m-1) mod m`.
    pub fn is_passive(&self) -> bool {
        match self.kind {
            DistKind::PartialJ => {
                let m = self.m as i64;
                let j = self.j_or_l as i64;
                j == m - 1 || (j - (self.k as i64 - (m - 1))).rem_euclid(m) == 0
            }
            DistKind::SectorL => false,
        }
    }
}

fn check_order(jet: &ComplexJet, k: u32) -> Result<()> {
    if jet.order() < k as usize {
        return Err(Error::OrderTooSmall {
            required: k as usize,
            actual: jet.order(),
        });
    }
    Ok(())
}

/// The coefficient ratio `binom((m-1-j)/m - 1, n) / binom(((k-j)-(m-1))/m, n)`
/// in exact rational arithmetic.  The denominator binomial never vanishes on
/// the admissible index range.
fn coefficient_ratio(m: u32, k: u32, j: u32, n: u32) -> Rational64 {
    let m_i = m as i64;
    let num_arg = Rational64::new(m_i - 1 - j as i64, m_i) - 1;
    let den_arg = Rational64::new(k as i64 - j as i64 - (m_i - 1), m_i);
    let num = binom_rat(num_arg, n);
    let den = binom_rat(den_arg, n);
    debug_assert!(
        !den.is_zero(),
        "denominator binomial vanished at m={m} k={k} j={j} n={n}"
    );
    num / den
}

/// The partial-derivative distribution:
/// sum over `0 <= n <= (k-j)/m` of
/// `binom(k, j+nm) * ratio(n) * d[j+nm][k-j-nm]`.
pub fn partial_dist(jet: &ComplexJet, m: u32, k: u32, j: u32) -> Result<Complex64> {
    check_order(jet, k)?;
    if m < 2 || j > k.min(m - 1) {
        return Err(Error::OutOfRange(format!(
            "partial index j = {j} out of range for m = {m}, k = {k}"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let mut n = 0u32;
    while j + n * m <= k {
        let i = j + n * m;
        let coeff =
            Rational64::from_integer(binom_u64(k, i) as i64) * coefficient_ratio(m, k, j, n);
        acc += jet.get(i as usize, (k - i) as usize) * coeff.to_f64().unwrap();
        n += 1;
    }
    Ok(acc)
}

/// The sector-weighted distribution, as the Beta-weighted combination of
/// [`partial_dist`] over the admissible derivative slots.
pub fn sector_dist(jet: &ComplexJet, m: u32, k: u32, l: u32) -> Result<Complex64> {
    check_order(jet, k)?;
    let idx = DistIndex::new(m, k, l, DistKind::SectorL)?;
    let roots = RootsOfUnity::new(m)?;
    let m_i = m as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=k.min(m - 2) {
        if (j as i64 - (k as i64 - (m_i - 1))).rem_euclid(m_i) == 0 {
            continue;
        }
        let beta = beta_like_rat(
            Rational64::new(m_i - 1 - j as i64, m_i),
            Rational64::new(m_i - 1 - (k as i64 - j as i64), m_i),
        );
        let phase = roots.theta0_pow(idx.j_or_l as i64 * (2 * j as i64 - k as i64));
        acc += phase * beta * partial_dist(jet, m, k, j)?;
    }
    Ok(acc)
}

/// The closed-form version of [`sector_dist`]: one Beta-weighted term per
/// derivative entry, the zero rule silently killing the excluded slots.
pub fn sector_dist_direct(jet: &ComplexJet, m: u32, k: u32, l: u32) -> Result<Complex64> {
    check_order(jet, k)?;
    let idx = DistIndex::new(m, k, l, DistKind::SectorL)?;
    let roots = RootsOfUnity::new(m)?;
    let m_i = m as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..=k {
        let beta = beta_like_rat(
            Rational64::new(m_i - 1 - i as i64, m_i),
            Rational64::new(m_i - 1 - (k as i64 - i as i64), m_i),
        );
        if beta.norm_sqr() == 0.0 {
            continue;
        }
        let phase = roots.theta0_pow(idx.j_or_l as i64 * (2 * i as i64 - k as i64));
        acc += phase * beta * binom_u64(k, i) * jet.get(i as usize, (k - i) as usize);
    }
    Ok(acc)
}

/// Distribution of `f * V` at the saddle, partial-derivative form.
pub fn weighted_partial_dist(
    f_jet: &ComplexJet,
    saddle: &SaddleModel,
    k: u32,
    j: u32,
) -> Result<Complex64> {
    partial_dist(&f_jet.product(&saddle.v_jet), saddle.m, k, j)
}

/// Distribution of `f * V` at the saddle, sector-weighted form.
pub fn weighted_sector_dist(
    f_jet: &ComplexJet,
    saddle: &SaddleModel,
    k: u32,
    l: u32,
) -> Result<Complex64> {
    sector_dist(&f_jet.product(&saddle.v_jet), saddle.m, k, l)
}

/// Recover the Beta-weighted partial distribution from the sector family:
/// `(1/2m) sum over l of theta0^(l(k-2j)) C^k_l` equals
/// `B((m-1-j)/m, (m-1-(k-j))/m) * partial^k_j` on the admissible slots and
/// vanishes on the passive ones.
pub fn recover_partial(cvals: &[Complex64], m: u32, k: u32, j: u32) -> Result<Complex64> {
    if m < 2 {
        return Err(Error::Domain(format!("m = {m} must be >= 2")));
    }
    if cvals.len() != 2 * m as usize {
        return Err(Error::OutOfRange(format!(
            "expected 2m = {} sector values, got {}",
            2 * m,
            cvals.len()
        )));
    }
    if j > k.min(m - 1) {
        return Err(Error::OutOfRange(format!("j = {j} out of range")));
    }
    let roots = RootsOfUnity::new(m)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, c) in cvals.iter().enumerate() {
        acc += roots.theta0_pow(l as i64 * (k as i64 - 2 * j as i64)) * c;
    }
    Ok(acc / (2.0 * m as f64))
}

/// The Beta weight attached to slot `j` in the sector family.
pub fn sector_weight(m: u32, k: u32, j: u32) -> Complex64 {
    let m_i = m as i64;
    beta_like_rat(
        Rational64::new(m_i - 1 - j as i64, m_i),
        Rational64::new(m_i - 1 - (k as i64 - j as i64), m_i),
    )
}

/// The jet of `w^j conj(w)^(k-j) / (k! V)`: the canonical dual test function
/// for the weighted partial distribution of index `(k, j)`.
pub fn dual_test_jet(saddle: &SaddleModel, k: u32, j: u32) -> Result<ComplexJet> {
    if j > k {
        return Err(Error::OutOfRange(format!("j = {j} exceeds k = {k}")));
    }
    let inv_v = saddle.v_jet.reciprocal()?;
    let mono = ComplexJet::monomial(j as usize, (k - j) as usize).extend_to(inv_v.order());
    Ok(mono.product(&inv_v).scaled_by(Complex64::new(
        1.0 / crate::jets::factorial(k as usize),
        0.0,
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    proptest! {
        #[test]
        fn parity_and_recovery_hold_on_random_jets(
            seed in 0u64..10_000,
            m in 2u32..6,
            k in 0u32..9,
        ) {
            let jet = random_jet(9, seed);
            let cvals: Vec<Complex64> =
                (0..2 * m).map(|l| sector_dist(&jet, m, k, l).unwrap()).collect();
            let scale = cvals.iter().map(|v| v.norm()).fold(1e-12, f64::max);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for l in 0..m as usize {
                prop_assert!((cvals[l + m as usize] - cvals[l] * sign).norm() <= 1e-12 * scale);
            }
            for j in 0..=k.min(m - 1) {
                let idx = DistIndex::new(m, k, j, DistKind::PartialJ).unwrap();
                let rec = recover_partial(&cvals, m, k, j).unwrap();
                if idx.is_passive() {
                    prop_assert!(rec.norm() <= 1e-10 * scale);
                } else {
                    let expect = sector_weight(m, k, j) * partial_dist(&jet, m, k, j).unwrap();
                    prop_assert!((rec - expect).norm() <= 1e-10 * expect.norm().max(1e-10));
                }
            }
        }
    }

    fn random_jet(order: usize, seed: u64) -> ComplexJet {
        let mut rng = seed.wrapping_add(0x9e3779b97f4a7c15);
        let mut next = || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut jet = ComplexJet::zero(order);
        for t in 0..=order {
            for i in 0..=t {
                jet.set(i, t - i, c(next(), next())).unwrap();
            }
        }
        jet
    }

    #[test]
    fn low_order_is_single_term() {
        // k <= m-2: partial_dist = binom(k, j) d[j][k-j]
        let jet = ComplexJet::monomial(1, 1);
        let v = partial_dist(&jet, 4, 2, 1).unwrap();
        assert_eq!(v, c(2.0, 0.0));
    }

    #[test]
    fn passive_slot_gives_factorial() {
        for m in 2..=5u32 {
            for k in (m - 1)..=10 {
                let p = ComplexJet::monomial(m as usize - 1, (k - (m - 1)) as usize);
                let v = partial_dist(&p, m, k, m - 1).unwrap();
                let expect = crate::jets::factorial(k as usize);
                assert_eq!(v.re, expect, "m={m} k={k}");
                assert_eq!(v.im, 0.0);
            }
        }
    }

    #[test]
    fn zero_jet_vanishes() {
        let z = ComplexJet::zero(8);
        assert_eq!(partial_dist(&z, 3, 5, 1).unwrap(), c(0.0, 0.0));
        assert_eq!(sector_dist(&z, 3, 5, 2).unwrap(), c(0.0, 0.0));
        assert_eq!(sector_dist_direct(&z, 3, 5, 2).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn constant_jet_sector_values() {
        let one = ComplexJet::constant(c(1.0, 0.0), 2);
        for l in 0..4 {
            let v = sector_dist(&one, 2, 0, l).unwrap();
            assert!((v - c(2.0, 0.0)).norm() < 1e-13, "l={l}: {v}");
            let v = sector_dist_direct(&one, 2, 0, l).unwrap();
            assert!((v - c(2.0, 0.0)).norm() < 1e-13);
        }
        let v = sector_dist(&one, 3, 0, 0).unwrap();
        assert!((v.re - 7.2859).abs() < 5e-4 && v.im.abs() < 1e-13, "{v}");
    }

    #[test]
    fn direct_form_agrees_with_weighted_sum() {
        for seed in 0..40u64 {
            let m = 2 + (seed % 4) as u32;
            let k = (seed % 9) as u32;
            let jet = random_jet(10, seed);
            for l in 0..2 * m {
                let a = sector_dist(&jet, m, k, l).unwrap();
                let b = sector_dist_direct(&jet, m, k, l).unwrap();
                let scale = a.norm().max(b.norm()).max(1e-10);
                assert!(
                    (a - b).norm() <= 1e-11 * scale,
                    "m={m} k={k} l={l}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn parity_relation() {
        for seed in 0..10u64 {
            let m = 2 + (seed % 3) as u32;
            let jet = random_jet(8, seed * 7 + 1);
            for k in 0..=8u32 {
                let vals: Vec<Complex64> = (0..2 * m)
                    .map(|l| sector_dist(&jet, m, k, l).unwrap())
                    .collect();
                let scale = vals.iter().map(|v| v.norm()).fold(1e-12, f64::max);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                for l in 0..m as usize {
                    let diff = (vals[l + m as usize] - vals[l] * sign).norm();
                    assert!(diff <= 1e-12 * scale, "m={m} k={k} l={l}");
                }
            }
        }
    }

    #[test]
    fn annihilation_sums() {
        for seed in 0..6u64 {
            let m = 2 + (seed % 4) as u32;
            let jet = random_jet(9, seed * 13 + 5);
            for k in 0..=9u32 {
                let cvals: Vec<Complex64> = (0..2 * m)
                    .map(|l| sector_dist(&jet, m, k, l).unwrap())
                    .collect();
                let scale = cvals.iter().map(|v| v.norm()).fold(1e-12, f64::max);
                for j in 0..=k.min(m - 1) {
                    let idx = DistIndex::new(m, k, j, DistKind::PartialJ).unwrap();
                    if idx.is_passive() {
                        let v = recover_partial(&cvals, m, k, j).unwrap();
                        assert!(v.norm() <= 1e-10 * scale, "m={m} k={k} j={j}: {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn recover_partial_round_trip() {
        for seed in 0..12u64 {
            let m = 2 + (seed % 4) as u32;
            let jet = random_jet(9, seed * 3 + 2);
            for k in 0..=9u32 {
                let cvals: Vec<Complex64> = (0..2 * m)
                    .map(|l| sector_dist(&jet, m, k, l).unwrap())
                    .collect();
                for j in 0..=k.min(m - 2) {
                    let idx = DistIndex::new(m, k, j, DistKind::PartialJ).unwrap();
                    if idx.is_passive() {
                        continue;
                    }
                    let beta = sector_weight(m, k, j);
                    assert!(beta.norm() > 1e-14);
                    let got = recover_partial(&cvals, m, k, j).unwrap() / beta;
                    let expect = partial_dist(&jet, m, k, j).unwrap();
                    let scale = expect.norm().max(1e-10);
                    assert!((got - expect).norm() <= 1e-10 * scale, "m={m} k={k} j={j}");
                }
            }
        }
    }

    #[test]
    fn linearity_in_jet() {
        let a = random_jet(6, 11);
        let b = random_jet(6, 22);
        let sum = a.add(&b);
        for (m, k, j) in [(2u32, 4u32, 0u32), (3, 5, 1), (4, 6, 2)] {
            let va = partial_dist(&a, m, k, j).unwrap();
            let vb = partial_dist(&b, m, k, j).unwrap();
            let vs = partial_dist(&sum, m, k, j).unwrap();
            assert!((vs - (va + vb)).norm() < 1e-12 * vs.norm().max(1.0));
        }
    }

    #[test]
    fn rotation_covariance() {
        // partial_dist of f rotated by theta0^-1 picks up theta0^-(2j-k)
        for m in 2..=4u32 {
            let roots = RootsOfUnity::new(m).unwrap();
            let jet = random_jet(6, 77 + m as u64);
            for k in 0..=6u32 {
                let mut rotated = ComplexJet::zero(6);
                for t in 0..=6usize {
                    for i in 0..=t {
                        let ph = roots.theta0_pow(-(2 * i as i64 - t as i64));
                        rotated.set(i, t - i, jet.get(i, t - i) * ph).unwrap();
                    }
                }
                for j in 0..=k.min(m - 1) {
                    let lhs = partial_dist(&rotated, m, k, j).unwrap();
                    let rhs = roots.theta0_pow(-(2 * j as i64 - k as i64))
                        * partial_dist(&jet, m, k, j).unwrap();
                    assert!(
                        (lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-6),
                        "m={m} k={k} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn dual_test_jets_are_dual() {
        // with a nontrivial density: weighted_partial_dist of the dual jet is
        // 1 at its own index and 0 elsewhere
        let mut v = ComplexJet::constant(c(2.0, 0.0), 8);
        v.set(1, 0, c(0.25, 0.0)).unwrap();
        v.set(0, 1, c(0.25, 0.0)).unwrap();
        v.set(1, 1, c(-0.5, 0.0)).unwrap();
        let saddle = SaddleModel::new(3, v, 0.9).unwrap();
        // sanity: the reciprocal jet really inverts V
        let inv = saddle.v_jet.reciprocal().unwrap();
        let id = saddle.v_jet.product(&inv);
        assert!((id.get(0, 0) - c(1.0, 0.0)).norm() < 1e-13);

        let k = 4u32;
        let j = 1u32;
        let chi = dual_test_jet(&saddle, k, j).unwrap();
        let own = weighted_partial_dist(&chi, &saddle, k, j).unwrap();
        assert!((own - c(1.0, 0.0)).norm() < 1e-10, "{own}");
        for kp in 0..=6u32 {
            for jp in 0..=kp.min(2) {
                if (kp, jp) == (k, j) {
                    continue;
                }
                let idx = DistIndex::new(3, kp, jp, DistKind::PartialJ).unwrap();
                if idx.is_passive() {
                    continue;
                }
                let v = weighted_partial_dist(&chi, &saddle, kp, jp).unwrap();
                assert!(v.norm() < 1e-10, "(k', j') = ({kp}, {jp}): {v}");
            }
        }
    }

    #[test]
    fn unit_density_reduces_to_plain_distribution() {
        let f = random_jet(7, 42);
        let saddle = SaddleModel::flat(3, 7);
        for k in 0..=6u32 {
            for j in 0..=k.min(2) {
                let a = weighted_partial_dist(&f, &saddle, k, j).unwrap();
                let b = partial_dist(&f, 3, k, j).unwrap();
                assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0), "k={k} j={j}");
            }
        }
    }

    #[test]
    fn scaling_identity() {
        // sector_dist of the rescaled product jet picks up eps^(k/m)
        let f = random_jet(8, 5);
        let saddle = SaddleModel::flat(3, 8);
        let eps: f64 = 0.4;
        let fv = f.product(&saddle.v_jet);
        let scaled = fv.rescale(eps.powf(1.0 / 3.0));
        for k in 0..=6u32 {
            for l in 0..6u32 {
                let lhs = sector_dist(&scaled, 3, k, l).unwrap();
                let rhs = sector_dist(&fv, 3, k, l).unwrap() * eps.powf(k as f64 / 3.0);
                assert!(
                    (lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1e-9),
                    "k={k} l={l}"
                );
            }
        }
    }
}
