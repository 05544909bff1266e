//! The trapezoid strip of a generalised conifold and its maximal lattice
//! triangulations.
//!
//! The strip for `C_{m,n}` has `m` unit segments on the top line and `n` on
//! the bottom. A maximal triangulation cuts it into `m + n` triangles of
//! area 1/2; walking left to right, exactly `m` of them have their
//! horizontal base on the top line, and that size-`m` subset of triangle
//! positions determines the triangulation completely. Everything downstream
//! (edge types, partition functions) is computed from this subset encoding.

use std::fmt;

use num_bigint::BigInt;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

/// Hard upper bound on `m + n` for enumeration: subsets live in a `u64`.
pub const DEFAULT_ENUM_BIT_LIMIT: u32 = 63;

/// Environment variable overriding the enumeration guard (values above
/// [`DEFAULT_ENUM_BIT_LIMIT`] are clamped; the subset encoding is a `u64`).
pub const ENUM_BITS_ENV: &str = "CONIFOLD_DT_MAX_ENUM_BITS";

fn enumeration_bit_limit() -> u32 {
    match std::env::var(ENUM_BITS_ENV) {
        Ok(raw) => raw
            .trim()
            .parse::<u32>()
            .map(|v| v.min(DEFAULT_ENUM_BIT_LIMIT))
            .unwrap_or(DEFAULT_ENUM_BIT_LIMIT),
        Err(_) => DEFAULT_ENUM_BIT_LIMIT,
    }
}

/// Exact binomial coefficient with the convention `C(n, k) = 0` for
/// `k < 0`, `k > n`, or `n < 0`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::from(0);
    }
    num_integer::binomial(BigInt::from(n), BigInt::from(k))
}

/// `C(n, k)` in `u64`; callers guarantee `n <= 63` so this cannot overflow.
pub(crate) fn binomial_u64(n: u32, k: u32) -> u64 {
    debug_assert!(n <= 63);
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc as u64
}

/// The pair `(m, n)` defining the strip (and the variety `C_{m,n}`).
///
/// `m > n` is allowed; nothing downstream assumes an ordering of the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StripDiagram {
    m: u32,
    n: u32,
}

/// The counting data of a strip: triangles, interior edges, triangulations,
/// and the Euler characteristic of any of its crepant resolutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripCounts {
    pub faces: u32,
    pub interior_edges: u32,
    pub triangulation_count: BigInt,
    pub euler_characteristic: u32,
}

impl StripDiagram {
    /// A strip needs at least one segment somewhere.
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m + n == 0 {
            return Err(Error::InvalidDiagram { m, n });
        }
        Ok(StripDiagram { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of triangles in every maximal triangulation: `m + n`.
    pub fn faces(&self) -> u32 {
        self.m + self.n
    }

    /// Number of interior edges: `m + n - 1`.
    pub fn interior_edges(&self) -> u32 {
        self.m + self.n - 1
    }

    /// Euler characteristic of any crepant resolution: `m + n`.
    pub fn euler_characteristic(&self) -> u32 {
        self.m + self.n
    }

    /// Number of maximal triangulations: `C(m+n, m)`. Exact at any size.
    pub fn triangulation_count(&self) -> BigInt {
        binomial((self.m + self.n) as i64, self.m as i64)
    }

    /// All four counts at once.
    pub fn counts(&self) -> StripCounts {
        StripCounts {
            faces: self.faces(),
            interior_edges: self.interior_edges(),
            triangulation_count: self.triangulation_count(),
            euler_characteristic: self.euler_characteristic(),
        }
    }

    /// The strip with top and bottom swapped.
    pub fn flipped(&self) -> StripDiagram {
        StripDiagram {
            m: self.n,
            n: self.m,
        }
    }

    /// Guard for every operation that walks all triangulations.
    pub(crate) fn check_enumerable(&self) -> Result<()> {
        let limit = enumeration_bit_limit();
        if self.faces() > limit {
            return Err(Error::EnumerationRangeExceeded {
                m: self.m,
                n: self.n,
                limit,
            });
        }
        Ok(())
    }

    pub(crate) fn triangulation_count_u64(&self) -> u64 {
        binomial_u64(self.faces(), self.m)
    }
}

impl fmt::Display for StripDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C_{{{},{}}}", self.m, self.n)
    }
}

/// A contiguous run of interior edges `e_i, ..., e_j` (1-based, `i <= j`).
///
/// The path indexes the curve class `Q_{ij} = Q_i ... Q_j`. Paths order
/// lexicographically by `(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgePath {
    i: u32,
    j: u32,
}

impl EdgePath {
    pub fn new(i: u32, j: u32) -> Result<Self> {
        if i == 0 || j < i {
            return Err(Error::InvalidPath(format!(
                "need 1 <= i <= j, got i={i}, j={j}"
            )));
        }
        Ok(EdgePath { i, j })
    }

    pub fn start(&self) -> u32 {
        self.i
    }

    pub fn end(&self) -> u32 {
        self.j
    }

    /// Number of edges in the path, `j - i + 1`.
    pub fn len(&self) -> u32 {
        self.j - self.i + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Shift both endpoints right by `offset` edges.
    pub fn offset(&self, offset: u32) -> EdgePath {
        EdgePath {
            i: self.i + offset,
            j: self.j + offset,
        }
    }
}

impl fmt::Display for EdgePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// All edge paths of the strip in lexicographic order; `C(m+n, 2)` of them,
/// empty when there are no interior edges.
pub fn edge_path_list(diagram: &StripDiagram) -> Vec<EdgePath> {
    let n_edges = diagram.interior_edges();
    let mut paths = Vec::with_capacity((n_edges as usize * (n_edges as usize + 1)) / 2);
    for i in 1..=n_edges {
        for j in i..=n_edges {
            paths.push(EdgePath { i, j });
        }
    }
    paths
}

/// A maximal triangulation of the strip, encoded as the set of positions
/// whose triangle is based on the top line.
///
/// Stored as a bitmask (bit `k-1` set iff triangle `t_k` is top-based),
/// which makes the edge-type test O(1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triangulation {
    diagram: StripDiagram,
    mask: u64,
}

impl Triangulation {
    /// Build from an explicit top set; elements must be distinct, lie in
    /// `1..=m+n`, and number exactly `m`.
    pub fn new(diagram: StripDiagram, top_set: &[u32]) -> Result<Self> {
        diagram.check_enumerable()?;
        let faces = diagram.faces();
        let mut mask: u64 = 0;
        for &k in top_set {
            if k == 0 || k > faces {
                return Err(Error::InvalidSubset(format!(
                    "element {k} outside 1..={faces}"
                )));
            }
            let bit = 1u64 << (k - 1);
            if mask & bit != 0 {
                return Err(Error::InvalidSubset(format!("duplicate element {k}")));
            }
            mask |= bit;
        }
        if mask.count_ones() != diagram.m() {
            return Err(Error::InvalidSubset(format!(
                "expected {} top-based triangles, got {}",
                diagram.m(),
                mask.count_ones()
            )));
        }
        Ok(Triangulation { diagram, mask })
    }

    pub(crate) fn from_mask(diagram: StripDiagram, mask: u64) -> Self {
        debug_assert_eq!(mask.count_ones(), diagram.m());
        Triangulation { diagram, mask }
    }

    pub fn diagram(&self) -> &StripDiagram {
        &self.diagram
    }

    /// Is triangle `t_k` based on the top line?
    pub fn is_top_based(&self, k: u32) -> bool {
        k >= 1 && k <= self.diagram.faces() && self.mask & (1u64 << (k - 1)) != 0
    }

    /// The defining subset, ascending.
    pub fn top_set(&self) -> Vec<u32> {
        (1..=self.diagram.faces())
            .filter(|&k| self.mask & (1u64 << (k - 1)) != 0)
            .collect()
    }

    /// Type of interior edge `e_i`: `+1` when triangles `t_i` and `t_{i+1}`
    /// are based on the same line (an O(-2,0) curve), `-1` otherwise
    /// (an O(-1,-1) curve, the flop-able kind).
    pub fn edge_type(&self, i: u32) -> Result<i8> {
        let max = self.diagram.interior_edges();
        if i == 0 || i > max {
            return Err(Error::EdgeIndexOutOfRange { index: i, max });
        }
        Ok(if self.is_top_based(i) == self.is_top_based(i + 1) {
            1
        } else {
            -1
        })
    }

    /// All edge types, index `k` holding the type of `e_{k+1}`.
    pub fn edge_types(&self) -> Vec<i8> {
        (1..=self.diagram.interior_edges())
            .map(|i| self.edge_type(i).expect("index in range"))
            .collect()
    }

    /// Product of edge types along a path; the exponent this triangulation
    /// contributes to the factor of the path's curve class.
    pub fn path_sign(&self, path: &EdgePath) -> Result<i8> {
        let max = self.diagram.interior_edges();
        if path.end() > max {
            return Err(Error::EdgeIndexOutOfRange {
                index: path.end(),
                max,
            });
        }
        let mut sign = 1i8;
        for i in path.start()..=path.end() {
            sign *= self.edge_type(i)?;
        }
        Ok(sign)
    }

    /// Number of top-based triangles among `t_lo ..= t_hi`.
    pub fn count_in_range(&self, lo: u32, hi: u32) -> u32 {
        (lo..=hi).filter(|&k| self.is_top_based(k)).count() as u32
    }

    /// The same triangulation viewed in the top-bottom-swapped strip: the
    /// complement subset. Edge types are unchanged by this swap.
    pub fn flipped(&self) -> Triangulation {
        let faces = self.diagram.faces();
        let full = if faces == 64 {
            u64::MAX
        } else {
            (1u64 << faces) - 1
        };
        Triangulation {
            diagram: self.diagram.flipped(),
            mask: full & !self.mask,
        }
    }
}

impl Serialize for Triangulation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Triangulation", 3)?;
        s.serialize_field("m", &self.diagram.m())?;
        s.serialize_field("n", &self.diagram.n())?;
        s.serialize_field("top_set", &self.top_set())?;
        s.end()
    }
}

/// Iterator over all triangulations in lexicographic order of the top set
/// viewed as a sorted tuple.
#[derive(Debug)]
pub struct TriangulationIter {
    diagram: StripDiagram,
    // Current combination, 1-based ascending; None once exhausted.
    state: Option<Vec<u32>>,
}

impl Iterator for TriangulationIter {
    type Item = Triangulation;

    fn next(&mut self) -> Option<Triangulation> {
        let combo = self.state.as_mut()?;
        let mut mask = 0u64;
        for &k in combo.iter() {
            mask |= 1u64 << (k - 1);
        }
        let item = Triangulation::from_mask(self.diagram, mask);

        // Advance to the lexicographic successor.
        let m = combo.len();
        let faces = self.diagram.faces();
        if m == 0 {
            self.state = None;
            return Some(item);
        }
        let mut k = m;
        loop {
            if k == 0 {
                self.state = None;
                break;
            }
            let idx = k - 1;
            if combo[idx] < faces - (m - k) as u32 {
                combo[idx] += 1;
                for t in k..m {
                    combo[t] = combo[t - 1] + 1;
                }
                break;
            }
            k -= 1;
        }
        Some(item)
    }
}

/// Enumerate every triangulation exactly once, lexicographically.
///
/// Errors with `enumeration-range-exceeded` when `m + n` is above the bit
/// limit; counting via [`StripDiagram::counts`] still works at any size.
pub fn enumerate_triangulations(diagram: &StripDiagram) -> Result<TriangulationIter> {
    diagram.check_enumerable()?;
    let m = diagram.m() as usize;
    Ok(TriangulationIter {
        diagram: *diagram,
        state: Some((1..=m as u32).collect()),
    })
}

/// The triangulation at position `rank` (0-based) of the lexicographic
/// enumeration, without iterating. This is what lets the total-partition
/// reduction split the index range across threads.
pub fn triangulation_at_lex_index(diagram: &StripDiagram, rank: u64) -> Result<Triangulation> {
    diagram.check_enumerable()?;
    let total = diagram.triangulation_count_u64();
    if rank >= total {
        return Err(Error::InvalidRange(format!(
            "rank {rank} out of range 0..{total}"
        )));
    }
    let faces = diagram.faces();
    let m = diagram.m();
    let mut mask = 0u64;
    let mut remaining = rank;
    let mut value = 1u32;
    for slot in 0..m {
        // Choose the smallest admissible value whose block of successors
        // still contains `remaining`.
        loop {
            let block = binomial_u64(faces - value, m - slot - 1);
            if remaining < block {
                mask |= 1u64 << (value - 1);
                value += 1;
                break;
            }
            remaining -= block;
            value += 1;
        }
    }
    Ok(Triangulation::from_mask(*diagram, mask))
}
