//! Exponent algebra over MacMahon factors.
//!
//! The reduced partition function of one resolution is a finite product
//! `prod_P M(Q_P, q)^{s_P}` over edge paths, with each sign `s_P` the product
//! of the edge types along the path. Multiplying over all resolutions under
//! the formal identification of the `Q` variables turns the product into a
//! componentwise sum of exponents, which is what [`ExponentMap`] stores.
//! This module computes those sums, decides homogeneity, and evaluates the
//! two closed forms for the common degree together with the signature
//! formula behind them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::strip::{
    binomial, edge_path_list, enumerate_triangulations, triangulation_at_lex_index, EdgePath,
    StripDiagram, Triangulation,
};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A partition function in multiplicative normal form: an integer exponent
/// per edge path plus a power of `M(1, q)`.
///
/// Zero exponents are never stored. The `M(1, q)` power is kept doubled so
/// that the per-resolution half-integral contribution `chi/2` stays exact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentMap {
    diagram: StripDiagram,
    path_exponents: BTreeMap<EdgePath, BigInt>,
    m1_twice: BigInt,
}

impl ExponentMap {
    /// The empty product (the constant series 1).
    pub fn empty(diagram: StripDiagram) -> Self {
        ExponentMap {
            diagram,
            path_exponents: BTreeMap::new(),
            m1_twice: BigInt::zero(),
        }
    }

    pub fn diagram(&self) -> &StripDiagram {
        &self.diagram
    }

    /// Exponent of the factor indexed by `path`; absent paths are 0.
    pub fn exponent(&self, path: &EdgePath) -> BigInt {
        self.path_exponents
            .get(path)
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// The stored (nonzero) factors in lexicographic path order.
    pub fn factors(&self) -> impl Iterator<Item = (&EdgePath, &BigInt)> {
        self.path_exponents.iter()
    }

    pub fn factor_count(&self) -> usize {
        self.path_exponents.len()
    }

    pub fn has_no_factors(&self) -> bool {
        self.path_exponents.is_empty()
    }

    /// Twice the power of `M(1, q)`; always an integer.
    pub fn m1_power_times_2(&self) -> &BigInt {
        &self.m1_twice
    }

    /// The power of `M(1, q)` as an exact rational.
    pub fn m1_power(&self) -> BigRational {
        BigRational::new(self.m1_twice.clone(), BigInt::from(2))
    }

    pub fn with_m1_twice(mut self, m1_twice: BigInt) -> Self {
        self.m1_twice = m1_twice;
        self
    }

    /// Add `delta` to the exponent of `path`, keeping the sparse form
    /// canonical.
    pub fn add_to_path(&mut self, path: EdgePath, delta: &BigInt) -> Result<()> {
        if path.end() > self.diagram.interior_edges() {
            return Err(Error::InvalidPath(format!(
                "path {path} outside the {} interior edges of {}",
                self.diagram.interior_edges(),
                self.diagram
            )));
        }
        if delta.is_zero() {
            return Ok(());
        }
        let entry = self
            .path_exponents
            .entry(path)
            .or_insert_with(BigInt::zero);
        *entry += delta;
        if entry.is_zero() {
            self.path_exponents.remove(&path);
        }
        Ok(())
    }

    /// Componentwise sum. Both maps must live on the same diagram.
    pub fn add(&self, other: &ExponentMap) -> ExponentMap {
        assert_eq!(self.diagram, other.diagram, "exponent maps on different diagrams");
        let mut out = self.clone();
        for (path, exp) in other.factors() {
            out.add_to_path(*path, exp).expect("path valid on shared diagram");
        }
        out.m1_twice += &other.m1_twice;
        out
    }

    /// Componentwise difference.
    pub fn sub(&self, other: &ExponentMap) -> ExponentMap {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    /// Multiply every exponent (and the `M(1,q)` power) by `c`.
    pub fn scale(&self, c: &BigInt) -> ExponentMap {
        if c.is_zero() {
            return ExponentMap::empty(self.diagram);
        }
        ExponentMap {
            diagram: self.diagram,
            path_exponents: self
                .path_exponents
                .iter()
                .map(|(p, e)| (*p, e * c))
                .collect(),
            m1_twice: &self.m1_twice * c,
        }
    }

    /// Re-index every path by `offset` edges into the larger `ambient`
    /// diagram; used when a block factor is embedded into the full strip.
    pub fn offset(&self, offset: u32, ambient: StripDiagram) -> Result<ExponentMap> {
        let mut out = ExponentMap::empty(ambient).with_m1_twice(self.m1_twice.clone());
        for (path, exp) in self.factors() {
            out.add_to_path(path.offset(offset), exp)?;
        }
        Ok(out)
    }
}

impl Serialize for ExponentMap {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Factors<'a>(&'a ExponentMap);
        impl Serialize for Factors<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.path_exponents.len()))?;
                for (path, exp) in self.0.factors() {
                    #[derive(serde::Serialize)]
                    struct Factor {
                        path: [u32; 2],
                        exp: String,
                    }
                    seq.serialize_element(&Factor {
                        path: [path.start(), path.end()],
                        exp: exp.to_string(),
                    })?;
                }
                seq.end()
            }
        }

        let mut s = serializer.serialize_struct("ExponentMap", 4)?;
        s.serialize_field("m", &self.diagram.m())?;
        s.serialize_field("n", &self.diagram.n())?;
        s.serialize_field(
            "m1_power_times_2",
            &self
                .m1_twice
                .to_i64()
                .expect("degree-zero power exceeds the JSON integer range"),
        )?;
        s.serialize_field("factors", &Factors(self))?;
        s.end()
    }
}

/// Outcome of the homogeneity check: either the common degree, or a pair of
/// paths witnessing different exponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneityReport {
    pub is_homogeneous: bool,
    pub degree: Option<BigInt>,
    pub witness: Option<(EdgePath, EdgePath)>,
}

/// Prefix parities of the type "-" edge counts; `path_sign` of `(i, j)` is
/// `+1` exactly when the parities at `j` and `i-1` agree.
fn minus_prefix(t: &Triangulation) -> Vec<bool> {
    let n_edges = t.diagram().interior_edges() as usize;
    let mut prefix = vec![false; n_edges + 1];
    for k in 1..=n_edges {
        let negative = t.edge_type(k as u32).expect("edge in range") < 0;
        prefix[k] = prefix[k - 1] ^ negative;
    }
    prefix
}

fn accumulate_path_signs(t: &Triangulation, paths: &[EdgePath], acc: &mut [BigInt]) {
    let prefix = minus_prefix(t);
    for (idx, path) in paths.iter().enumerate() {
        if prefix[path.end() as usize] == prefix[(path.start() - 1) as usize] {
            acc[idx] += 1;
        } else {
            acc[idx] -= 1;
        }
    }
}

fn map_from_accumulator(
    diagram: StripDiagram,
    paths: &[EdgePath],
    acc: Vec<BigInt>,
) -> ExponentMap {
    let mut out = ExponentMap::empty(diagram);
    for (path, exp) in paths.iter().zip(acc) {
        if !exp.is_zero() {
            out.path_exponents.insert(*path, exp);
        }
    }
    out
}

/// The reduced partition function of a single resolution: exponent
/// `product of edge types along P` for every edge path `P`, no `M(1,q)`
/// part.
pub fn reduced_partition(t: &Triangulation) -> ExponentMap {
    let paths = edge_path_list(t.diagram());
    let mut acc = vec![BigInt::zero(); paths.len()];
    accumulate_path_signs(t, &paths, &mut acc);
    map_from_accumulator(*t.diagram(), &paths, acc)
}

/// Sum of [`reduced_partition`] over every triangulation, sequentially.
pub fn total_partition_seq(diagram: &StripDiagram) -> Result<ExponentMap> {
    let paths = edge_path_list(diagram);
    let mut acc = vec![BigInt::zero(); paths.len()];
    for t in enumerate_triangulations(diagram)? {
        accumulate_path_signs(&t, &paths, &mut acc);
    }
    Ok(map_from_accumulator(*diagram, &paths, acc))
}

/// Sum of [`reduced_partition`] over every triangulation, splitting the
/// lexicographic index range across threads. Exact arithmetic makes the
/// reduction order irrelevant.
#[cfg(feature = "parallel")]
pub fn total_partition_par(diagram: &StripDiagram) -> Result<ExponentMap> {
    diagram.check_enumerable()?;
    let paths = edge_path_list(diagram);
    let count = diagram.triangulation_count_u64();
    let zero = || vec![BigInt::zero(); paths.len()];
    let acc = (0..count)
        .into_par_iter()
        .fold(zero, |mut acc, rank| {
            let t = triangulation_at_lex_index(diagram, rank).expect("rank below count");
            accumulate_path_signs(&t, &paths, &mut acc);
            acc
        })
        .reduce(zero, |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        });
    Ok(map_from_accumulator(*diagram, &paths, acc))
}

/// The total partition function of the strip: the product of the reduced
/// partition functions of all crepant resolutions under formal
/// identification of the curve variables.
pub fn total_partition(diagram: &StripDiagram) -> Result<ExponentMap> {
    #[cfg(feature = "parallel")]
    {
        total_partition_par(diagram)
    }
    #[cfg(not(feature = "parallel"))]
    {
        total_partition_seq(diagram)
    }
}

/// The product of topological-string partition functions over all
/// resolutions: the total partition plus `M(1,q)^{C(m+n,m)(m+n)/2}`.
pub fn unreduced_total(diagram: &StripDiagram) -> Result<ExponentMap> {
    let total = total_partition(diagram)?;
    let m1_twice = diagram.triangulation_count() * BigInt::from(diagram.faces());
    Ok(total.with_m1_twice(m1_twice))
}

/// Common degree of the total partition function, as the manifestly
/// integral combination `2 C(m+n-2, m-2) + 2 C(m+n-2, n-2) - C(m+n, n)`.
///
/// Undefined for a single triangle (`m + n < 2`), where the strip has no
/// interior edge.
pub fn degree_formula(diagram: &StripDiagram) -> Result<BigInt> {
    let (m, n) = (diagram.m() as i64, diagram.n() as i64);
    if m + n < 2 {
        return Err(Error::UndefinedDegree {
            m: diagram.m(),
            n: diagram.n(),
        });
    }
    Ok(BigInt::from(2) * binomial(m + n - 2, m - 2) + BigInt::from(2) * binomial(m + n - 2, n - 2)
        - binomial(m + n, n))
}

/// The same degree through the probability of an edge path connecting two
/// same-line triangles, evaluated in exact rational arithmetic.
pub fn degree_probabilistic(diagram: &StripDiagram) -> Result<BigInt> {
    let (m, n) = (diagram.m() as i64, diagram.n() as i64);
    let total = m + n;
    if total < 2 {
        return Err(Error::InvalidRange(format!(
            "no interior edge in C_{{{m},{n}}}"
        )));
    }
    let numerator = BigInt::from(2 * m * (m - 1) + 2 * n * (n - 1) - total * (total - 1));
    let denominator = BigInt::from(total * (total - 1));
    let d = BigRational::new(numerator, denominator)
        * BigRational::from_integer(binomial(total, n));
    // d is an integer; the rational route only makes the derivation exact.
    if !d.is_integer() {
        return Err(Error::InvalidRange(format!(
            "degree {d} is not an integer"
        )));
    }
    Ok(d.to_integer())
}

/// Decide whether every edge path of the ambient strip carries one common
/// exponent; paths absent from the sparse map count as exponent 0.
pub fn check_homogeneity(map: &ExponentMap) -> HomogeneityReport {
    let paths = edge_path_list(map.diagram());
    let Some(first) = paths.first() else {
        // No interior edges: the empty product, homogeneous of degree 0.
        return HomogeneityReport {
            is_homogeneous: true,
            degree: Some(BigInt::zero()),
            witness: None,
        };
    };
    let common = map.exponent(first);
    for path in &paths[1..] {
        if map.exponent(path) != common {
            return HomogeneityReport {
                is_homogeneous: false,
                degree: None,
                witness: Some((*first, *path)),
            };
        }
    }
    HomogeneityReport {
        is_homogeneous: true,
        degree: Some(common),
        witness: None,
    }
}

fn check_signature_range(n_elements: u32, m: u32) -> Result<()> {
    if n_elements < 2 || m > n_elements {
        return Err(Error::InvalidRange(format!(
            "signature needs N >= 2 and 0 <= m <= N, got N={n_elements}, m={m}"
        )));
    }
    Ok(())
}

/// Closed form of the m-signature of any contiguous set:
/// `C(N, m) - 4 C(N-2, m-1)`.
pub fn signature_closed_form(n_elements: u32, m: u32) -> Result<BigInt> {
    check_signature_range(n_elements, m)?;
    let (n, m) = (n_elements as i64, m as i64);
    Ok(binomial(n, m) - BigInt::from(4) * binomial(n - 2, m - 1))
}

/// The m-signature summed literally over all `C(N, m)` subsets.
///
/// `s` is the contiguous run of edge positions `{i, ..., j}` inside
/// `{1, ..., N-1}`; the characteristic sequence is read at positions
/// `i ..= j+1` so the difference sequence has one entry per edge. This is
/// the independent oracle for [`signature_closed_form`].
pub fn signature_bruteforce(n_elements: u32, m: u32, s: &EdgePath) -> Result<BigInt> {
    check_signature_range(n_elements, m)?;
    if s.end() > n_elements - 1 {
        return Err(Error::InvalidRange(format!(
            "contiguous set {s} not inside 1..={}",
            n_elements - 1
        )));
    }
    let mut sigma = BigInt::zero();
    for mask in subsets_of_size(n_elements, m) {
        let characteristic: Vec<u8> = (s.start()..=s.end() + 1)
            .map(|k| ((mask >> (k - 1)) & 1) as u8)
            .collect();
        let mut sign = 1i64;
        for pair in characteristic.windows(2) {
            if pair[0] != pair[1] {
                sign = -sign;
            }
        }
        sigma += sign;
    }
    Ok(sigma)
}

/// All size-`m` subsets of `{1..n}` as bitmasks (Gosper's hack); order is
/// irrelevant to the signature sum.
fn subsets_of_size(n: u32, m: u32) -> impl Iterator<Item = u64> {
    let limit: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut current: Option<u64> = Some(if m == 0 { 0 } else { (1u64 << m) - 1 });
    std::iter::from_fn(move || {
        let mask = current?;
        if mask > limit {
            current = None;
            return None;
        }
        current = if mask == 0 {
            None
        } else {
            let c = mask & mask.wrapping_neg();
            let r = mask + c;
            Some(r | (((r ^ mask) >> 2) / c))
        };
        Some(mask)
    })
}
