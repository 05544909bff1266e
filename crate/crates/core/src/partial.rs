//! Partial resolutions: totals restricted to triangulations refining a
//! pre-triangulated strip, and the factorization they satisfy.
//!
//! Fixing some interior edges of the strip splits `(m, n)` into blocks
//! `(m_k, n_k)`. The triangulations compatible with the fixed edges are
//! exactly those whose top set meets block `k`'s triangle range in `m_k`
//! elements; their restricted total factors into each block's full total
//! (raised to the number of choices in the other blocks) times a leftover
//! supported on paths crossing a fixed edge.

use num_bigint::BigInt;
use serde::ser::{Serialize, SerializeSeq, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::macmahon::{reduced_partition, total_partition, ExponentMap};
use crate::strip::{binomial, EdgePath, StripDiagram, Triangulation};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A splitting `(m, n) = sum_k (m_k, n_k)` with every block non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecomposition {
    diagram: StripDiagram,
    blocks: Vec<(u32, u32)>,
}

impl BlockDecomposition {
    pub fn new(diagram: StripDiagram, blocks: Vec<(u32, u32)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidDecomposition(
                "at least one block is required".to_string(),
            ));
        }
        let (mut m_sum, mut n_sum) = (0u32, 0u32);
        for &(mk, nk) in &blocks {
            if mk + nk == 0 {
                return Err(Error::InvalidDecomposition(
                    "blocks must satisfy m_k + n_k >= 1".to_string(),
                ));
            }
            m_sum += mk;
            n_sum += nk;
        }
        if m_sum != diagram.m() || n_sum != diagram.n() {
            return Err(Error::InvalidDecomposition(format!(
                "blocks sum to ({m_sum},{n_sum}), diagram is {diagram}"
            )));
        }
        Ok(BlockDecomposition { diagram, blocks })
    }

    pub fn diagram(&self) -> &StripDiagram {
        &self.diagram
    }

    pub fn blocks(&self) -> &[(u32, u32)] {
        &self.blocks
    }

    /// Triangle index of the last triangle of each block; the first `P - 1`
    /// entries are the fixed interior edges `s_k`.
    pub fn block_ends(&self) -> Vec<u32> {
        let mut ends = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for &(mk, nk) in &self.blocks {
            acc += mk + nk;
            ends.push(acc);
        }
        ends
    }

    /// The fixed interior edges: every `s_k` except the final `m + n`.
    pub fn fixed_edges(&self) -> Vec<u32> {
        let mut ends = self.block_ends();
        ends.pop();
        ends
    }

    /// Does `path` cross one of the fixed interior edges?
    pub fn crosses_boundary(&self, path: &EdgePath) -> bool {
        self.fixed_edges()
            .iter()
            .any(|&s| path.start() <= s && s <= path.end())
    }

    /// `prod_k C(m_k + n_k, n_k)`, the number of compatible triangulations.
    pub fn restricted_count(&self) -> BigInt {
        self.blocks
            .iter()
            .map(|&(mk, nk)| binomial((mk + nk) as i64, nk as i64))
            .product()
    }
}

impl Serialize for BlockDecomposition {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Blocks<'a>(&'a [(u32, u32)]);
        impl Serialize for Blocks<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for &(mk, nk) in self.0 {
                    seq.serialize_element(&[mk, nk])?;
                }
                seq.end()
            }
        }
        let mut s = serializer.serialize_struct("BlockDecomposition", 3)?;
        s.serialize_field("m", &self.diagram.m())?;
        s.serialize_field("n", &self.diagram.n())?;
        s.serialize_field("blocks", &Blocks(&self.blocks))?;
        s.end()
    }
}

/// Per-block multiplicities `b_k = prod_{j != k} C(m_j + n_j, n_j)`: how
/// many compatible triangulations of the full strip restrict to any one
/// fixed triangulation of block `k`.
pub fn block_multiplicities(decomposition: &BlockDecomposition) -> Vec<BigInt> {
    let counts: Vec<BigInt> = decomposition
        .blocks()
        .iter()
        .map(|&(mk, nk)| binomial((mk + nk) as i64, nk as i64))
        .collect();
    (0..counts.len())
        .map(|k| {
            counts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, c)| c.clone())
                .product()
        })
        .collect()
}

struct BlockLayout {
    // (sub-diagram, triangle offset) per block.
    parts: Vec<(StripDiagram, u32)>,
}

impl BlockLayout {
    fn new(decomposition: &BlockDecomposition) -> Self {
        let mut parts = Vec::with_capacity(decomposition.blocks().len());
        let mut offset = 0u32;
        for &(mk, nk) in decomposition.blocks() {
            let sub = StripDiagram::new(mk, nk).expect("blocks are non-empty");
            parts.push((sub, offset));
            offset += mk + nk;
        }
        BlockLayout { parts }
    }

    fn counts_u64(&self) -> Vec<u64> {
        self.parts
            .iter()
            .map(|(sub, _)| sub.triangulation_count_u64())
            .collect()
    }

    /// Triangulation at mixed-radix position `rank`, the leftmost block
    /// varying slowest; this is the lexicographic order of the global top
    /// set.
    fn at_index(&self, decomposition: &BlockDecomposition, mut rank: u64) -> Triangulation {
        let counts = self.counts_u64();
        let mut digits = vec![0u64; counts.len()];
        for k in (0..counts.len()).rev() {
            digits[k] = rank % counts[k];
            rank /= counts[k];
        }
        let mut top_set = Vec::with_capacity(decomposition.diagram().m() as usize);
        for ((sub, offset), digit) in self.parts.iter().zip(digits) {
            let local = crate::strip::triangulation_at_lex_index(sub, digit)
                .expect("digit below block count");
            top_set.extend(local.top_set().into_iter().map(|k| k + offset));
        }
        Triangulation::new(*decomposition.diagram(), &top_set).expect("valid by construction")
    }
}

/// Every triangulation of the full strip meeting block `k` in exactly `m_k`
/// top-based triangles, in lexicographic order of the top set.
pub fn restricted_triangulations(
    decomposition: &BlockDecomposition,
) -> Result<Vec<Triangulation>> {
    decomposition.diagram().check_enumerable()?;
    let layout = BlockLayout::new(decomposition);
    let total: u64 = layout.counts_u64().iter().product();
    Ok((0..total)
        .map(|rank| layout.at_index(decomposition, rank))
        .collect())
}

/// Sum of [`reduced_partition`] over the restricted triangulations,
/// sequentially.
pub fn restricted_total_seq(decomposition: &BlockDecomposition) -> Result<ExponentMap> {
    decomposition.diagram().check_enumerable()?;
    let layout = BlockLayout::new(decomposition);
    let total: u64 = layout.counts_u64().iter().product();
    let mut acc = ExponentMap::empty(*decomposition.diagram());
    for rank in 0..total {
        acc = acc.add(&reduced_partition(&layout.at_index(decomposition, rank)));
    }
    Ok(acc)
}

/// Sum of [`reduced_partition`] over the restricted triangulations,
/// splitting the index range across threads.
#[cfg(feature = "parallel")]
pub fn restricted_total_par(decomposition: &BlockDecomposition) -> Result<ExponentMap> {
    decomposition.diagram().check_enumerable()?;
    let layout = BlockLayout::new(decomposition);
    let total: u64 = layout.counts_u64().iter().product();
    let empty = || ExponentMap::empty(*decomposition.diagram());
    Ok((0..total)
        .into_par_iter()
        .fold(empty, |acc, rank| {
            acc.add(&reduced_partition(&layout.at_index(decomposition, rank)))
        })
        .reduce(empty, |a, b| a.add(&b)))
}

/// The total partition function of the partially resolved space: the
/// product of reduced partition functions over compatible triangulations
/// only.
pub fn restricted_total(decomposition: &BlockDecomposition) -> Result<ExponentMap> {
    #[cfg(feature = "parallel")]
    {
        restricted_total_par(decomposition)
    }
    #[cfg(not(feature = "parallel"))]
    {
        restricted_total_seq(decomposition)
    }
}

/// One block's contribution to the factorization: the block's own total,
/// embedded at its global edge offset, with its multiplicity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockFactor {
    pub block: (u32, u32),
    pub edge_offset: u32,
    pub multiplicity: BigInt,
    pub total: ExponentMap,
}

/// The factorization `restricted = zpp + sum_k b_k * (embedded block
/// total)`, with `zpp` supported on boundary-crossing paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub decomposition: BlockDecomposition,
    pub zpp: ExponentMap,
    pub block_factors: Vec<BlockFactor>,
}

impl Factorization {
    /// `zpp + sum_k b_k * total_k`; must reproduce the restricted total.
    pub fn recombine(&self) -> ExponentMap {
        let mut acc = self.zpp.clone();
        for factor in &self.block_factors {
            acc = acc.add(&factor.total.scale(&factor.multiplicity));
        }
        acc
    }

    /// Paths in the support of `zpp` that fail to cross a fixed edge;
    /// always empty.
    pub fn boundary_support_violations(&self) -> Vec<EdgePath> {
        self.zpp
            .factors()
            .filter(|(p, _)| !self.decomposition.crosses_boundary(p))
            .map(|(p, _)| *p)
            .collect()
    }
}

impl Serialize for Factorization {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        struct Blocks<'a>(&'a [BlockFactor]);
        impl Serialize for Blocks<'_> {
            fn serialize<S: Serializer>(
                &self,
                serializer: S,
            ) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
                for factor in self.0 {
                    #[derive(serde::Serialize)]
                    struct Entry<'a> {
                        block: [u32; 2],
                        edge_offset: u32,
                        multiplicity: String,
                        total: &'a ExponentMap,
                    }
                    seq.serialize_element(&Entry {
                        block: [factor.block.0, factor.block.1],
                        edge_offset: factor.edge_offset,
                        multiplicity: factor.multiplicity.to_string(),
                        total: &factor.total,
                    })?;
                }
                seq.end()
            }
        }
        let mut s = serializer.serialize_struct("Factorization", 5)?;
        s.serialize_field("m", &self.decomposition.diagram().m())?;
        s.serialize_field("n", &self.decomposition.diagram().n())?;
        s.serialize_field("blocks", &self.decomposition)?;
        s.serialize_field("zpp", &self.zpp)?;
        s.serialize_field("block_factors", &Blocks(&self.block_factors))?;
        s.end()
    }
}

/// Split the restricted total into embedded block totals with their
/// multiplicities and the leftover `zpp`, defined by subtraction.
pub fn factorize(decomposition: &BlockDecomposition) -> Result<Factorization> {
    let restricted = restricted_total(decomposition)?;
    let multiplicities = block_multiplicities(decomposition);
    let ambient = *decomposition.diagram();

    let mut block_factors = Vec::with_capacity(decomposition.blocks().len());
    let mut edge_offset = 0u32;
    for (&(mk, nk), b_k) in decomposition.blocks().iter().zip(multiplicities) {
        let sub = StripDiagram::new(mk, nk).expect("blocks are non-empty");
        let total = total_partition(&sub)?.offset(edge_offset, ambient)?;
        block_factors.push(BlockFactor {
            block: (mk, nk),
            edge_offset,
            multiplicity: b_k,
            total,
        });
        edge_offset += mk + nk;
    }

    let mut zpp = restricted;
    for factor in &block_factors {
        zpp = zpp.sub(&factor.total.scale(&factor.multiplicity));
    }
    Ok(Factorization {
        decomposition: decomposition.clone(),
        zpp,
        block_factors,
    })
}

/// All block decompositions of a strip, the first block descending
/// lexicographically; used by the verification sweeps.
pub fn enumerate_decompositions(diagram: &StripDiagram) -> Vec<BlockDecomposition> {
    fn recurse(
        diagram: &StripDiagram,
        m_left: u32,
        n_left: u32,
        prefix: &mut Vec<(u32, u32)>,
        out: &mut Vec<BlockDecomposition>,
    ) {
        if m_left == 0 && n_left == 0 {
            out.push(
                BlockDecomposition::new(*diagram, prefix.clone()).expect("sums match by construction"),
            );
            return;
        }
        for mk in (0..=m_left).rev() {
            for nk in (0..=n_left).rev() {
                if mk + nk == 0 {
                    continue;
                }
                prefix.push((mk, nk));
                recurse(diagram, m_left - mk, n_left - nk, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    recurse(
        diagram,
        diagram.m(),
        diagram.n(),
        &mut Vec::new(),
        &mut out,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macmahon::{check_homogeneity, degree_formula};
    use crate::strip::enumerate_triangulations;
    use num_traits::{One, ToPrimitive};

    fn diagram(m: u32, n: u32) -> StripDiagram {
        StripDiagram::new(m, n).unwrap()
    }

    fn decomposition(m: u32, n: u32, blocks: &[(u32, u32)]) -> BlockDecomposition {
        BlockDecomposition::new(diagram(m, n), blocks.to_vec()).unwrap()
    }

    #[test]
    fn invalid_decompositions_are_rejected() {
        assert!(BlockDecomposition::new(diagram(2, 2), vec![]).is_err());
        assert!(BlockDecomposition::new(diagram(2, 2), vec![(1, 1)]).is_err());
        assert!(BlockDecomposition::new(diagram(2, 2), vec![(1, 1), (0, 0), (1, 1)]).is_err());
        assert!(BlockDecomposition::new(diagram(2, 2), vec![(2, 1), (1, 1)]).is_err());
    }

    #[test]
    fn single_block_is_unrestricted() {
        let d = decomposition(2, 2, &[(2, 2)]);
        let restricted: Vec<_> = restricted_triangulations(&d)
            .unwrap()
            .iter()
            .map(|t| t.top_set())
            .collect();
        let full: Vec<_> = enumerate_triangulations(&diagram(2, 2))
            .unwrap()
            .map(|t| t.top_set())
            .collect();
        assert_eq!(restricted, full);
        assert_eq!(block_multiplicities(&d), vec![BigInt::one()]);
    }

    #[test]
    fn restricted_count_for_known_decompositions() {
        let d = decomposition(3, 4, &[(2, 1), (1, 3)]);
        let triangulations = restricted_triangulations(&d).unwrap();
        assert_eq!(triangulations.len(), 12);
        assert_eq!(d.restricted_count(), BigInt::from(12));
        for t in &triangulations {
            assert_eq!(t.count_in_range(1, 3), 2);
            assert_eq!(t.count_in_range(4, 7), 1);
        }

        let d = decomposition(1, 1, &[(1, 0), (0, 1)]);
        let triangulations = restricted_triangulations(&d).unwrap();
        assert_eq!(triangulations.len(), 1);
        assert_eq!(triangulations[0].top_set(), vec![1]);
    }

    #[test]
    fn multiplicities_for_known_decompositions() {
        let d = decomposition(3, 4, &[(2, 1), (1, 3)]);
        assert_eq!(
            block_multiplicities(&d),
            vec![BigInt::from(4), BigInt::from(3)]
        );

        let d = decomposition(3, 3, &[(1, 1), (1, 1), (1, 1)]);
        assert_eq!(
            block_multiplicities(&d),
            vec![BigInt::from(4), BigInt::from(4), BigInt::from(4)]
        );
    }

    #[test]
    fn restricted_total_with_single_block_is_the_total() {
        let d = decomposition(2, 3, &[(2, 3)]);
        assert_eq!(
            restricted_total(&d).unwrap(),
            total_partition(&diagram(2, 3)).unwrap()
        );
    }

    #[test]
    fn restricted_total_of_forced_conifold() {
        let d = decomposition(1, 1, &[(1, 0), (0, 1)]);
        let map = restricted_total(&d).unwrap();
        let path = EdgePath::new(1, 1).unwrap();
        assert_eq!(map.exponent(&path), BigInt::from(-1));
        assert_eq!(map.factor_count(), 1);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_restricted_total_equals_sequential() {
        for (m, n, blocks) in [
            (3, 4, vec![(2, 1), (1, 3)]),
            (2, 2, vec![(1, 1), (1, 1)]),
            (3, 3, vec![(1, 1), (1, 1), (1, 1)]),
        ] {
            let d = BlockDecomposition::new(diagram(m, n), blocks).unwrap();
            assert_eq!(
                restricted_total_par(&d).unwrap(),
                restricted_total_seq(&d).unwrap()
            );
        }
    }

    #[test]
    fn factorize_single_block() {
        let d = decomposition(2, 3, &[(2, 3)]);
        let f = factorize(&d).unwrap();
        assert!(f.zpp.has_no_factors());
        assert_eq!(f.block_factors.len(), 1);
        assert_eq!(f.block_factors[0].multiplicity, BigInt::one());
        assert_eq!(
            f.block_factors[0].total,
            total_partition(&diagram(2, 3)).unwrap()
        );
    }

    #[test]
    fn factorize_two_conifold_blocks() {
        let d = decomposition(2, 2, &[(1, 1), (1, 1)]);
        let f = factorize(&d).unwrap();
        for factor in &f.block_factors {
            assert_eq!(factor.multiplicity, BigInt::from(2));
            let report = check_homogeneity(&total_partition(&diagram(1, 1)).unwrap());
            assert_eq!(report.degree, Some(BigInt::from(-2)));
        }
        // The embedded totals sit at edges 1 and 3.
        assert_eq!(
            f.block_factors[0].total.exponent(&EdgePath::new(1, 1).unwrap()),
            BigInt::from(-2)
        );
        assert_eq!(
            f.block_factors[1].total.exponent(&EdgePath::new(3, 3).unwrap()),
            BigInt::from(-2)
        );
        assert_eq!(f.recombine(), restricted_total(&d).unwrap());
        assert!(f.boundary_support_violations().is_empty());
    }

    #[test]
    fn factorize_known_two_block_example() {
        let d = decomposition(3, 4, &[(2, 1), (1, 3)]);
        let f = factorize(&d).unwrap();
        assert_eq!(f.recombine(), restricted_total(&d).unwrap());
        assert!(f.boundary_support_violations().is_empty());
        // The leftover crosses the single fixed edge s_1 = 3.
        assert!(!f.zpp.has_no_factors());
        for (p, _) in f.zpp.factors() {
            assert!(p.start() <= 3 && 3 <= p.end(), "path {p} must cross edge 3");
        }
        // Within-block paths carry the block totals times the
        // multiplicities: block 1 has common degree -1 and b_1 = 4.
        let restricted = restricted_total(&d).unwrap();
        assert_eq!(degree_formula(&diagram(2, 1)).unwrap(), BigInt::from(-1));
        for (i, j) in [(1, 1), (1, 2), (2, 2)] {
            assert_eq!(
                restricted.exponent(&EdgePath::new(i, j).unwrap()),
                BigInt::from(-4)
            );
        }
    }

    #[test]
    fn factorization_identity_sweep() {
        for m in 0..=3u32 {
            for n in 0..=3u32 {
                if m + n < 1 || m + n > 6 {
                    continue;
                }
                let base = diagram(m, n);
                for d in enumerate_decompositions(&base) {
                    let count = restricted_triangulations(&d).unwrap().len();
                    assert_eq!(
                        BigInt::from(count),
                        d.restricted_count(),
                        "count identity fails for {:?}",
                        d.blocks()
                    );
                    let f = factorize(&d).unwrap();
                    assert_eq!(
                        f.recombine(),
                        restricted_total(&d).unwrap(),
                        "factorization identity fails for {:?}",
                        d.blocks()
                    );
                    assert!(
                        f.boundary_support_violations().is_empty(),
                        "support condition fails for {:?}",
                        d.blocks()
                    );
                }
            }
        }
    }

    #[test]
    fn decomposition_enumeration_counts() {
        // Single-segment strips decompose only trivially.
        assert_eq!(enumerate_decompositions(&diagram(0, 1)).len(), 1);
        // (1,1): blocks [(1,1)], [(1,0),(0,1)], [(0,1),(1,0)].
        let ds = enumerate_decompositions(&diagram(1, 1));
        assert_eq!(ds.len(), 3);
        let all: std::collections::HashSet<Vec<(u32, u32)>> =
            ds.iter().map(|d| d.blocks().to_vec()).collect();
        assert!(all.contains(&vec![(1, 1)]));
        assert!(all.contains(&vec![(1, 0), (0, 1)]));
        assert!(all.contains(&vec![(0, 1), (1, 0)]));
    }

    #[test]
    fn serialization_shapes() {
        let d = decomposition(3, 4, &[(2, 1), (1, 3)]);
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"m":3,"n":4,"blocks":[[2,1],[1,3]]}"#);
        let f = factorize(&d).unwrap();
        let value: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(value["blocks"]["blocks"][0][0], 2);
        assert_eq!(value["block_factors"][0]["multiplicity"], "4");
        assert_eq!(value["block_factors"][1]["multiplicity"], "3");
        assert!(value["zpp"]["factors"]
            .as_array()
            .unwrap()
            .iter()
            .all(|f| {
                let p = f["path"].as_array().unwrap();
                p[0].as_u64().unwrap() <= 3 && 3 <= p[1].as_u64().unwrap()
            }));
        let _ = f.block_factors[0].total.exponent(&EdgePath::new(1, 1).unwrap()).to_i64();
    }
}
