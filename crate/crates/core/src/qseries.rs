//! Exact truncated power series in `q` with Laurent-polynomial coefficients
//! in the curve variables.
//!
//! This is the numeric oracle: any identity the exponent algebra claims can
//! be expanded here coefficientwise. Everything is integer (or, internally
//! for the exponential route, rational) arithmetic; there is no floating
//! point anywhere.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::flop::SignedFactorList;
use crate::laurent::LaurentMonomial;
use crate::macmahon::ExponentMap;
use crate::strip::binomial;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sparse integer Laurent polynomial in the `Q` variables.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    terms: BTreeMap<LaurentMonomial, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn constant(num_vars: usize, c: BigInt) -> Self {
        let mut poly = LaurentPoly::default();
        poly.add_term(LaurentMonomial::unit(num_vars), c);
        poly
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LaurentMonomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, monomial: &LaurentMonomial) -> BigInt {
        self.terms
            .get(monomial)
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn add_term(&mut self, monomial: LaurentMonomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(monomial).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            // The key is cheap to recover; remove lazily.
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    fn add_assign(&mut self, other: &LaurentPoly) {
        for (m, c) in other.terms() {
            self.add_term(m.clone(), c.clone());
        }
    }

    fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::default();
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    fn neg(&self) -> LaurentPoly {
        LaurentPoly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    fn is_one(&self, num_vars: usize) -> bool {
        self.terms.len() == 1
            && self.coefficient(&LaurentMonomial::unit(num_vars)) == BigInt::one()
    }
}

/// A power series in `q` truncated at order `K`, with [`LaurentPoly`]
/// coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    num_vars: usize,
    coeffs: Vec<LaurentPoly>,
}

impl QSeries {
    /// The constant series 1.
    pub fn one(num_vars: usize, order: u32) -> Self {
        let mut coeffs = vec![LaurentPoly::zero(); order as usize + 1];
        coeffs[0] = LaurentPoly::constant(num_vars, BigInt::one());
        QSeries { num_vars, coeffs }
    }

    /// Build a series from explicit `(q-power, monomial, coefficient)`
    /// triples; later triples accumulate into earlier ones.
    pub fn from_terms(
        num_vars: usize,
        order: u32,
        terms: impl IntoIterator<Item = (u32, LaurentMonomial, BigInt)>,
    ) -> Result<Self> {
        let mut coeffs = vec![LaurentPoly::zero(); order as usize + 1];
        for (k, monomial, c) in terms {
            if k > order {
                return Err(Error::InvalidRange(format!(
                    "term at q^{k} beyond truncation order {order}"
                )));
            }
            if monomial.num_vars() != num_vars {
                return Err(Error::OrderMismatch(format!(
                    "monomial has {} variables, series has {num_vars}",
                    monomial.num_vars()
                )));
            }
            coeffs[k as usize].add_term(monomial, c);
        }
        Ok(QSeries { num_vars, coeffs })
    }

    pub fn truncation_order(&self) -> u32 {
        (self.coeffs.len() - 1) as u32
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn coefficient(&self, k: u32) -> &LaurentPoly {
        &self.coeffs[k as usize]
    }

    fn check_compatible(&self, other: &QSeries) -> Result<()> {
        if self.truncation_order() != other.truncation_order() || self.num_vars != other.num_vars
        {
            return Err(Error::OrderMismatch(format!(
                "left has order {} in {} variables, right has order {} in {}",
                self.truncation_order(),
                self.num_vars,
                other.truncation_order(),
                other.num_vars
            )));
        }
        Ok(())
    }

    /// Cauchy product truncated at the shared order.
    pub fn mul(&self, other: &QSeries) -> Result<QSeries> {
        self.check_compatible(other)?;
        let order = self.coeffs.len();
        let convolve = |k: usize| {
            let mut out = LaurentPoly::zero();
            for a in 0..=k {
                let (lhs, rhs) = (&self.coeffs[a], &other.coeffs[k - a]);
                if lhs.is_zero() || rhs.is_zero() {
                    continue;
                }
                out.add_assign(&lhs.mul(rhs));
            }
            out
        };
        #[cfg(feature = "parallel")]
        let coeffs: Vec<LaurentPoly> = (0..order).into_par_iter().map(convolve).collect();
        #[cfg(not(feature = "parallel"))]
        let coeffs: Vec<LaurentPoly> = (0..order).map(convolve).collect();
        Ok(QSeries {
            num_vars: self.num_vars,
            coeffs,
        })
    }

    /// Multiplicative inverse, solving for the coefficients recursively.
    /// Requires constant term 1.
    fn inverse(&self) -> Result<QSeries> {
        if !self.coeffs[0].is_one(self.num_vars) {
            return Err(Error::NonUnitConstantTerm);
        }
        let order = self.coeffs.len();
        let mut inv = vec![LaurentPoly::zero(); order];
        inv[0] = LaurentPoly::constant(self.num_vars, BigInt::one());
        for k in 1..order {
            let mut acc = LaurentPoly::zero();
            for j in 1..=k {
                if self.coeffs[j].is_zero() || inv[k - j].is_zero() {
                    continue;
                }
                acc.add_assign(&self.coeffs[j].mul(&inv[k - j]));
            }
            inv[k] = acc.neg();
        }
        Ok(QSeries {
            num_vars: self.num_vars,
            coeffs: inv,
        })
    }

    /// `self^e` for any integer `e`, by binary exponentiation; negative
    /// powers go through the recursive inverse and need constant term 1.
    pub fn pow(&self, e: i64) -> Result<QSeries> {
        if e == 0 {
            return Ok(QSeries::one(self.num_vars, self.truncation_order()));
        }
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut exponent = e.unsigned_abs();
        let mut square = base;
        let mut acc = QSeries::one(self.num_vars, self.truncation_order());
        while exponent > 0 {
            if exponent & 1 == 1 {
                acc = acc.mul(&square)?;
            }
            exponent >>= 1;
            if exponent > 0 {
                square = square.mul(&square)?;
            }
        }
        Ok(acc)
    }
}

/// The generalised MacMahon function `M(x, q)` as the finite truncated
/// product `prod_{k=1..K} (1 - x q^k)^{-k}`; factors beyond `k = K` cannot
/// contribute below `q^{K+1}`.
pub fn macmahon_series(x: &LaurentMonomial, order: u32) -> QSeries {
    let num_vars = x.num_vars();
    let mut acc = QSeries::one(num_vars, order);
    for k in 1..=order {
        // (1 - x q^k)^{-k} = sum_j C(k+j-1, j) x^j q^{kj}
        let mut factor = vec![LaurentPoly::zero(); order as usize + 1];
        let mut j = 0u32;
        while k * j <= order {
            factor[(k * j) as usize].add_term(
                x.pow(j as i64),
                binomial((k + j - 1) as i64, j as i64),
            );
            j += 1;
        }
        let factor = QSeries {
            num_vars,
            coeffs: factor,
        };
        acc = acc.mul(&factor).expect("orders match by construction");
    }
    acc
}

/// The same function through its exponential form
/// `exp( sum_{i,j >= 1} (i/j) x^j q^{ij} )`, expanded over exact rationals.
///
/// This is the independent second route used to cross-check
/// [`macmahon_series`]; the two must agree coefficientwise.
pub fn macmahon_exp_series(x: &LaurentMonomial, order: u32) -> QSeries {
    let num_vars = x.num_vars();
    let size = order as usize + 1;

    type RatPoly = BTreeMap<LaurentMonomial, BigRational>;
    let rat_mul = |a: &[RatPoly], b: &[RatPoly]| -> Vec<RatPoly> {
        let mut out = vec![RatPoly::new(); size];
        for (ka, pa) in a.iter().enumerate() {
            for (kb, pb) in b.iter().enumerate() {
                if ka + kb >= size {
                    break;
                }
                for (ma, ca) in pa {
                    for (mb, cb) in pb {
                        let entry = out[ka + kb]
                            .entry(ma.mul(mb))
                            .or_insert_with(BigRational::zero);
                        *entry += ca * cb;
                    }
                }
            }
        }
        out
    };

    // The exponent sum_{ij <= K} (i/j) x^j q^{ij}.
    let mut arg = vec![RatPoly::new(); size];
    for i in 1..=order {
        for j in 1..=order / i {
            let entry = arg[(i * j) as usize]
                .entry(x.pow(j as i64))
                .or_insert_with(BigRational::zero);
            *entry += BigRational::new(BigInt::from(i), BigInt::from(j));
        }
    }

    // exp(arg) = sum_t arg^t / t!; arg has no constant term, so the sum
    // terminates at t = K.
    let mut result = vec![RatPoly::new(); size];
    result[0].insert(LaurentMonomial::unit(num_vars), BigRational::one());
    let mut term = result.clone();
    for t in 1..=order {
        term = rat_mul(&term, &arg);
        let t_rat = BigRational::from_integer(BigInt::from(t));
        for poly in term.iter_mut() {
            for c in poly.values_mut() {
                *c /= &t_rat;
            }
        }
        for (k, poly) in term.iter().enumerate() {
            for (m, c) in poly {
                let entry = result[k].entry(m.clone()).or_insert_with(BigRational::zero);
                *entry += c;
            }
        }
    }

    let coeffs = result
        .into_iter()
        .map(|poly| {
            let mut out = LaurentPoly::zero();
            for (m, c) in poly {
                if c.is_zero() {
                    continue;
                }
                assert!(c.is_integer(), "exponential route produced {c}");
                out.add_term(m, c.to_integer());
            }
            out
        })
        .collect();
    QSeries { num_vars, coeffs }
}

fn exponent_to_i64(e: &BigInt) -> Result<i64> {
    e.to_i64()
        .ok_or_else(|| Error::ExponentOverflow(e.to_string()))
}

fn evaluate_product<'a>(
    num_vars: usize,
    m1_twice: &BigInt,
    factors: impl Iterator<Item = (LaurentMonomial, &'a BigInt)>,
    order: u32,
) -> Result<QSeries> {
    if !(m1_twice.clone() % BigInt::from(2)).is_zero() {
        return Err(Error::HalfIntegerM1(m1_twice.to_string()));
    }
    let m1 = exponent_to_i64(&(m1_twice / BigInt::from(2)))?;
    let mut acc = if m1 == 0 {
        QSeries::one(num_vars, order)
    } else {
        macmahon_series(&LaurentMonomial::unit(num_vars), order).pow(m1)?
    };
    for (monomial, exp) in factors {
        let factor = macmahon_series(&monomial, order).pow(exponent_to_i64(exp)?)?;
        acc = acc.mul(&factor)?;
    }
    Ok(acc)
}

/// Expand `prod_P M(Q_P, q)^{e_P} * M(1, q)^{m1}` to order `K`.
///
/// Half-integral `M(1,q)` powers are rejected; callers verify the squared
/// identity instead of introducing square-root series.
pub fn evaluate_exponent_map(map: &ExponentMap, order: u32) -> Result<QSeries> {
    let num_vars = map.diagram().interior_edges() as usize;
    evaluate_product(
        num_vars,
        map.m1_power_times_2(),
        map.factors()
            .map(|(p, e)| (LaurentMonomial::from_path(num_vars, p).expect("path fits"), e)),
        order,
    )
}

/// Expand a change-of-variables product (arbitrary Laurent-monomial
/// arguments) to order `K`.
pub fn evaluate_factor_list(list: &SignedFactorList, order: u32) -> Result<QSeries> {
    evaluate_product(
        list.num_vars(),
        list.m1_power_times_2(),
        list.factors().map(|(m, e)| (m.clone(), e)),
        order,
    )
}

impl fmt::Display for QSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, poly) in self.coeffs.iter().enumerate() {
            for (monomial, c) in poly.terms() {
                if !first {
                    f.write_str(" + ")?;
                }
                first = false;
                write!(f, "{c}")?;
                if !monomial.is_unit() {
                    write!(f, " * {monomial}")?;
                }
                if k > 0 {
                    write!(f, " * q^{k}")?;
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for QSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Terms<'a>(&'a QSeries);
        impl Serialize for Terms<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                #[derive(serde::Serialize)]
                struct Term<'a> {
                    q: usize,
                    monomial: &'a [i64],
                    coeff: String,
                }
                let mut seq = serializer.serialize_seq(None)?;
                for (k, poly) in self.0.coeffs.iter().enumerate() {
                    for (monomial, c) in poly.terms() {
                        seq.serialize_element(&Term {
                            q: k,
                            monomial: monomial.exponents(),
                            coeff: c.to_string(),
                        })?;
                    }
                }
                seq.end()
            }
        }
        let mut s = serializer.serialize_struct("QSeries", 3)?;
        s.serialize_field("truncation_order", &self.truncation_order())?;
        s.serialize_field("num_vars", &self.num_vars)?;
        s.serialize_field("terms", &Terms(self))?;
        s.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macmahon::total_partition;
    use crate::strip::{EdgePath, StripDiagram};

    fn unit_coeffs(series: &QSeries) -> Vec<i64> {
        let unit = LaurentMonomial::unit(series.num_vars());
        (0..=series.truncation_order())
            .map(|k| series.coefficient(k).coefficient(&unit).to_i64().unwrap())
            .collect()
    }

    #[test]
    fn macmahon_counts_plane_partitions() {
        let series = macmahon_series(&LaurentMonomial::unit(0), 4);
        assert_eq!(unit_coeffs(&series), vec![1, 1, 3, 6, 13]);
    }

    #[test]
    fn macmahon_single_variable_low_order() {
        let q1 = LaurentMonomial::variable(1, 1).unwrap();
        let series = macmahon_series(&q1, 2);
        // (1 - Q1 q)^{-1} (1 - Q1 q^2)^{-2} = 1 + Q1 q + (2 Q1 + Q1^2) q^2
        assert!(series.coefficient(0).is_one(1));
        assert_eq!(series.coefficient(1).coefficient(&q1), BigInt::one());
        assert_eq!(series.coefficient(2).coefficient(&q1), BigInt::from(2));
        assert_eq!(series.coefficient(2).coefficient(&q1.pow(2)), BigInt::one());
    }

    #[test]
    fn macmahon_at_order_zero_is_one() {
        let series = macmahon_series(&LaurentMonomial::variable(2, 1).unwrap(), 0);
        assert_eq!(series, QSeries::one(2, 0));
    }

    #[test]
    fn exponential_route_agrees_with_product_route() {
        for x in [
            LaurentMonomial::unit(1),
            LaurentMonomial::variable(1, 1).unwrap(),
            LaurentMonomial::variable(2, 2).unwrap(),
        ] {
            assert_eq!(macmahon_exp_series(&x, 6), macmahon_series(&x, 6));
        }
    }

    #[test]
    fn multiplication_identities() {
        let a = macmahon_series(&LaurentMonomial::variable(1, 1).unwrap(), 5);
        let one = QSeries::one(1, 5);
        assert_eq!(a.mul(&one).unwrap(), a);

        let inv = a.pow(-1).unwrap();
        assert_eq!(a.mul(&inv).unwrap(), one);

        // (1 + q)(1 - q) = 1 - q^2
        let unit = LaurentMonomial::unit(0);
        let plus = QSeries::from_terms(
            0,
            2,
            [
                (0, unit.clone(), BigInt::one()),
                (1, unit.clone(), BigInt::one()),
            ],
        )
        .unwrap();
        let minus = QSeries::from_terms(
            0,
            2,
            [
                (0, unit.clone(), BigInt::one()),
                (1, unit.clone(), BigInt::from(-1)),
            ],
        )
        .unwrap();
        let expected = QSeries::from_terms(
            0,
            2,
            [
                (0, unit.clone(), BigInt::one()),
                (2, unit.clone(), BigInt::from(-1)),
            ],
        )
        .unwrap();
        assert_eq!(plus.mul(&minus).unwrap(), expected);
    }

    #[test]
    fn powers_and_inverses() {
        let m = macmahon_series(&LaurentMonomial::unit(0), 4);
        assert_eq!(m.pow(0).unwrap(), QSeries::one(0, 4));
        assert_eq!(unit_coeffs(&m.pow(2).unwrap()), vec![1, 2, 7, 18, 47]);

        let twice_inverted = m.pow(-1).unwrap().pow(-1).unwrap();
        assert_eq!(twice_inverted, m);

        let no_unit = QSeries::from_terms(
            0,
            3,
            [(0, LaurentMonomial::unit(0), BigInt::from(2))],
        )
        .unwrap();
        assert!(matches!(no_unit.pow(-1), Err(Error::NonUnitConstantTerm)));
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let a = QSeries::one(1, 3);
        let b = QSeries::one(1, 4);
        assert!(matches!(a.mul(&b), Err(Error::OrderMismatch(_))));
        let c = QSeries::one(2, 3);
        assert!(matches!(a.mul(&c), Err(Error::OrderMismatch(_))));
    }

    #[test]
    fn evaluate_single_factor_map() {
        let d = StripDiagram::new(1, 1).unwrap();
        let map = total_partition(&d).unwrap();
        let expanded = evaluate_exponent_map(&map, 3).unwrap();
        let direct = macmahon_series(&LaurentMonomial::variable(1, 1).unwrap(), 3)
            .pow(-2)
            .unwrap();
        assert_eq!(expanded, direct);
    }

    #[test]
    fn evaluate_rejects_half_integral_m1() {
        let d = StripDiagram::new(1, 1).unwrap();
        let map = crate::macmahon::ExponentMap::empty(d).with_m1_twice(BigInt::from(3));
        assert!(matches!(
            evaluate_exponent_map(&map, 2),
            Err(Error::HalfIntegerM1(_))
        ));
    }

    #[test]
    fn evaluate_total_against_homogeneous_product() {
        // C_{2,3} has common degree -2: expanding the computed exponent map
        // must equal the explicit product over all paths.
        let d = StripDiagram::new(2, 3).unwrap();
        let order = 4;
        let lhs = evaluate_exponent_map(&total_partition(&d).unwrap(), order).unwrap();
        let num_vars = d.interior_edges() as usize;
        let mut rhs = QSeries::one(num_vars, order);
        for p in crate::strip::edge_path_list(&d) {
            let x = LaurentMonomial::from_path(num_vars, &p).unwrap();
            rhs = rhs.mul(&macmahon_series(&x, order)).unwrap();
        }
        let rhs = rhs.pow(-2).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn display_format() {
        let q1 = LaurentMonomial::variable(1, 1).unwrap();
        let series = macmahon_series(&q1, 2);
        assert_eq!(
            series.to_string(),
            "1 + 1 * Q1 * q^1 + 1 * Q1 * q^2 + 2 * Q1^2 * q^2"
        );
    }

    #[test]
    fn path_monomial_evaluation_uses_contiguous_variables() {
        let d = StripDiagram::new(1, 3).unwrap();
        let map = total_partition(&d).unwrap();
        // Everything cancelled: the expansion is exactly 1.
        let series = evaluate_exponent_map(&map, 4).unwrap();
        assert_eq!(series, QSeries::one(3, 4));
        let _ = EdgePath::new(1, 2).unwrap();
    }
}
