//! The invariant suite behind the `verify` subcommand.
//!
//! Each property sweeps a size-bounded family and returns the first
//! counterexample as text; `run_all` packages the lot for reporting. The
//! acceptance tests call the individual sweeps with their own bounds.

use num_bigint::BigInt;
use num_traits::One;

use crate::laurent::LaurentMonomial;
use crate::macmahon::{
    check_homogeneity, degree_formula, degree_probabilistic, reduced_partition,
    signature_bruteforce, signature_closed_form, total_partition, total_partition_seq,
    ExponentMap,
};
use crate::partial::{
    block_multiplicities, enumerate_decompositions, factorize, restricted_total,
    restricted_triangulations,
};
use crate::qseries::{evaluate_exponent_map, macmahon_exp_series, macmahon_series, QSeries};
use crate::strip::{
    edge_path_list, enumerate_triangulations, triangulation_at_lex_index, EdgePath, StripDiagram,
};
use crate::flop::{flop_chain_bases, flop_total, SignedFactorList};

type Check = std::result::Result<(), String>;

/// Outcome of one property sweep.
#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn diagrams_up_to(max_total: u32) -> impl Iterator<Item = StripDiagram> {
    (1..=max_total).flat_map(|total| {
        (0..=total).map(move |m| StripDiagram::new(m, total - m).expect("total >= 1"))
    })
}

/// Enumeration emits exactly `C(m+n, m)` distinct triangulations, sorted,
/// and the direct lexicographic indexing agrees with iteration.
pub fn enumeration_count_and_order(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total) {
        let sets: Vec<Vec<u32>> = enumerate_triangulations(&d)
            .map_err(|e| e.to_string())?
            .map(|t| t.top_set())
            .collect();
        if BigInt::from(sets.len()) != d.triangulation_count() {
            return Err(format!(
                "{d}: enumerated {} triangulations, expected {}",
                sets.len(),
                d.triangulation_count()
            ));
        }
        let mut sorted = sets.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != sets {
            return Err(format!("{d}: enumeration not sorted or not distinct"));
        }
        for (rank, set) in sets.iter().enumerate() {
            let direct = triangulation_at_lex_index(&d, rank as u64).map_err(|e| e.to_string())?;
            if &direct.top_set() != set {
                return Err(format!("{d}: rank {rank} disagrees with iteration"));
            }
        }
    }
    Ok(())
}

/// Every edge is typed, and complementing the top set (swapping the strip's
/// two lines) changes no edge type.
pub fn edge_type_complement_symmetry(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total) {
        for t in enumerate_triangulations(&d).map_err(|e| e.to_string())? {
            let types = t.edge_types();
            if types.len() != d.interior_edges() as usize {
                return Err(format!("{d}: wrong number of edge types"));
            }
            let flipped = t.flipped();
            for i in 1..=d.interior_edges() {
                let a = t.edge_type(i).map_err(|e| e.to_string())?;
                let b = flipped.edge_type(i).map_err(|e| e.to_string())?;
                if a != b {
                    return Err(format!(
                        "{d}: edge {i} changes type under complement for T={:?}",
                        t.top_set()
                    ));
                }
            }
        }
    }
    Ok(())
}

/// The homogeneity theorem: every total is homogeneous, and its degree
/// matches both closed forms.
pub fn homogeneity_theorem(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total) {
        if d.faces() < 2 {
            continue;
        }
        let report = check_homogeneity(&total_partition(&d).map_err(|e| e.to_string())?);
        if !report.is_homogeneous {
            return Err(format!("{d}: total not homogeneous, witness {:?}", report.witness));
        }
        let degree = report.degree.expect("homogeneous");
        let formula = degree_formula(&d).map_err(|e| e.to_string())?;
        let probabilistic = degree_probabilistic(&d).map_err(|e| e.to_string())?;
        if degree != formula || degree != probabilistic {
            return Err(format!(
                "{d}: degree {degree} vs formula {formula} vs probabilistic {probabilistic}"
            ));
        }
    }
    Ok(())
}

/// Brute-force signatures match the closed form for every contiguous set,
/// independent of its position and length.
pub fn signature_consistency(max_elements: u32) -> Check {
    for n_elements in 2..=max_elements.max(2) {
        for m in 0..=n_elements {
            let closed = signature_closed_form(n_elements, m).map_err(|e| e.to_string())?;
            for i in 1..n_elements {
                for j in i..n_elements {
                    let s = EdgePath::new(i, j).expect("i <= j");
                    let brute =
                        signature_bruteforce(n_elements, m, &s).map_err(|e| e.to_string())?;
                    if brute != closed {
                        return Err(format!(
                            "N={n_elements}, m={m}, S=({i},{j}): brute {brute} != closed {closed}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Each path exponent of the total equals the signature closed form.
pub fn path_level_equivalence(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(10)) {
        if d.faces() < 2 {
            continue;
        }
        let total = total_partition(&d).map_err(|e| e.to_string())?;
        let sig = signature_closed_form(d.faces(), d.m()).map_err(|e| e.to_string())?;
        for p in edge_path_list(&d) {
            if total.exponent(&p) != sig {
                return Err(format!("{d}: path {p} has exponent {}, signature {sig}", total.exponent(&p)));
            }
        }
    }
    Ok(())
}

/// The total is the componentwise sum of the per-resolution reduced
/// partitions, and the threaded reduction agrees with the sequential one.
pub fn additivity(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(8)) {
        let mut sum = ExponentMap::empty(d);
        for t in enumerate_triangulations(&d).map_err(|e| e.to_string())? {
            sum = sum.add(&reduced_partition(&t));
        }
        let seq = total_partition_seq(&d).map_err(|e| e.to_string())?;
        if sum != seq {
            return Err(format!("{d}: definitional sum differs from sequential total"));
        }
        #[cfg(feature = "parallel")]
        {
            let par = crate::macmahon::total_partition_par(&d).map_err(|e| e.to_string())?;
            if par != seq {
                return Err(format!("{d}: parallel total differs from sequential"));
            }
        }
    }
    Ok(())
}

/// Totals and degrees are unchanged by swapping the two lines of the strip.
pub fn flip_symmetry(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(8)) {
        let a = total_partition(&d).map_err(|e| e.to_string())?;
        let b = total_partition(&d.flipped()).map_err(|e| e.to_string())?;
        let pairs = |m: &ExponentMap| -> Vec<(EdgePath, BigInt)> {
            m.factors().map(|(p, e)| (*p, e.clone())).collect()
        };
        if pairs(&a) != pairs(&b) {
            return Err(format!("{d}: total differs from its flip"));
        }
        if d.faces() >= 2 {
            let da = degree_formula(&d).map_err(|e| e.to_string())?;
            let db = degree_formula(&d.flipped()).map_err(|e| e.to_string())?;
            if da != db {
                return Err(format!("{d}: degree {da} differs from flipped degree {db}"));
            }
        }
    }
    Ok(())
}

fn factor_list_pairs(list: &SignedFactorList) -> Vec<(Vec<i64>, BigInt)> {
    list.factors()
        .map(|(m, e)| (m.exponents().to_vec(), e.clone()))
        .collect()
}

/// The flop chain: frozen small products, the Euler power `(n+1)^2 / 2`,
/// and cancellation independence of accumulation order.
pub fn flop_chain_products(max_n: u32) -> Check {
    let known_one = vec![(vec![-1], BigInt::from(-1)), (vec![1], BigInt::from(-1))];
    let list = flop_total(&StripDiagram::new(1, 1).expect("valid")).map_err(|e| e.to_string())?;
    if factor_list_pairs(&list) != known_one {
        return Err("conifold chain product differs from the known list".to_string());
    }

    for n in 1..=max_n.max(3).min(10) {
        let d = StripDiagram::new(1, n).expect("valid");
        let list = flop_total(&d).map_err(|e| e.to_string())?;
        let expected_m1 = BigInt::from((n + 1) * (n + 1));
        if list.m1_power_times_2() != &expected_m1 {
            return Err(format!(
                "n={n}: doubled degree-zero power {} != {expected_m1}",
                list.m1_power_times_2()
            ));
        }
        // Re-accumulate every contribution in reverse and compare.
        let bases = flop_chain_bases(&d).map_err(|e| e.to_string())?;
        let mut contributions = Vec::new();
        for (r, basis) in bases.iter().enumerate() {
            let t = crate::strip::Triangulation::new(d, &[r as u32 + 1])
                .map_err(|e| e.to_string())?;
            for (path, exp) in reduced_partition(&t).factors() {
                let mut monomial = LaurentMonomial::unit(n as usize);
                for k in path.start()..=path.end() {
                    monomial = monomial.mul(&basis[(k - 1) as usize]);
                }
                contributions.push((monomial, exp.clone()));
            }
        }
        let mut rebuilt = SignedFactorList::empty(n as usize);
        rebuilt.add_m1_twice(list.m1_power_times_2());
        for (monomial, exp) in contributions.into_iter().rev() {
            rebuilt.add_factor(monomial, &exp);
        }
        if rebuilt != list {
            return Err(format!("n={n}: cancellation depends on accumulation order"));
        }
    }
    Ok(())
}

/// The two closed forms of the MacMahon function agree coefficientwise.
pub fn macmahon_two_routes() -> Check {
    let order = 8;
    for x in [
        LaurentMonomial::unit(1),
        LaurentMonomial::variable(1, 1).expect("in range"),
        LaurentMonomial::variable(3, 2).expect("in range"),
    ] {
        if macmahon_exp_series(&x, order) != macmahon_series(&x, order) {
            return Err(format!("routes disagree for x={x} at order {order}"));
        }
    }
    Ok(())
}

/// Series multiplication is commutative and associative at fixed order.
pub fn series_multiplication_algebra() -> Check {
    let order = 6;
    let a = macmahon_series(&LaurentMonomial::variable(2, 1).expect("in range"), order);
    let b = macmahon_series(&LaurentMonomial::variable(2, 2).expect("in range"), order)
        .pow(-1)
        .map_err(|e| e.to_string())?;
    let c = macmahon_series(&LaurentMonomial::unit(2), order);
    let ab = a.mul(&b).map_err(|e| e.to_string())?;
    let ba = b.mul(&a).map_err(|e| e.to_string())?;
    if ab != ba {
        return Err("multiplication is not commutative".to_string());
    }
    let left = ab.mul(&c).map_err(|e| e.to_string())?;
    let right = a.mul(&b.mul(&c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    if left != right {
        return Err("multiplication is not associative".to_string());
    }
    Ok(())
}

/// Expanding the computed total coefficientwise equals the explicit
/// homogeneous product over all paths.
pub fn exponent_map_series_identity(max_total: u32) -> Check {
    let order = 5;
    for d in diagrams_up_to(max_total.min(5)) {
        if d.faces() < 2 {
            continue;
        }
        let total = total_partition(&d).map_err(|e| e.to_string())?;
        let lhs = evaluate_exponent_map(&total, order).map_err(|e| e.to_string())?;
        let num_vars = d.interior_edges() as usize;
        let degree = degree_formula(&d).map_err(|e| e.to_string())?;
        let degree_i64 = i64::try_from(&degree).map_err(|e| e.to_string())?;
        let mut product = QSeries::one(num_vars, order);
        for p in edge_path_list(&d) {
            let x = LaurentMonomial::from_path(num_vars, &p).map_err(|e| e.to_string())?;
            product = product
                .mul(&macmahon_series(&x, order))
                .map_err(|e| e.to_string())?;
        }
        let rhs = product.pow(degree_i64).map_err(|e| e.to_string())?;
        if lhs != rhs {
            return Err(format!("{d}: series expansion differs from homogeneous form"));
        }
    }
    Ok(())
}

/// `|restricted| = prod_k C(m_k + n_k, n_k)` for every decomposition.
pub fn restricted_count_identity(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(10)) {
        for decomposition in enumerate_decompositions(&d) {
            let listed = restricted_triangulations(&decomposition)
                .map_err(|e| e.to_string())?
                .len();
            if BigInt::from(listed) != decomposition.restricted_count() {
                return Err(format!(
                    "{d} blocks {:?}: {listed} listed vs {}",
                    decomposition.blocks(),
                    decomposition.restricted_count()
                ));
            }
        }
    }
    Ok(())
}

/// `restricted = zpp + sum_k b_k * (embedded block total)` exactly, with
/// `zpp` supported on boundary-crossing paths only.
pub fn factorization_identity(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(9)) {
        for decomposition in enumerate_decompositions(&d) {
            let f = factorize(&decomposition).map_err(|e| e.to_string())?;
            if f.recombine() != restricted_total(&decomposition).map_err(|e| e.to_string())? {
                return Err(format!(
                    "{d} blocks {:?}: recombination differs from restricted total",
                    decomposition.blocks()
                ));
            }
            let violations = f.boundary_support_violations();
            if !violations.is_empty() {
                return Err(format!(
                    "{d} blocks {:?}: leftover supported on non-crossing paths {violations:?}",
                    decomposition.blocks()
                ));
            }
        }
    }
    Ok(())
}

/// Every block factor is itself homogeneous of the block's formula degree.
pub fn block_homogeneity(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(8)) {
        for decomposition in enumerate_decompositions(&d) {
            let multiplicities = block_multiplicities(&decomposition);
            let f = factorize(&decomposition).map_err(|e| e.to_string())?;
            for (factor, b_k) in f.block_factors.iter().zip(multiplicities) {
                if factor.multiplicity != b_k {
                    return Err(format!("{d}: multiplicity mismatch on block {:?}", factor.block));
                }
                let (mk, nk) = factor.block;
                if mk + nk < 2 {
                    continue;
                }
                let sub = StripDiagram::new(mk, nk).expect("non-empty block");
                let report = check_homogeneity(&total_partition(&sub).map_err(|e| e.to_string())?);
                let expected = degree_formula(&sub).map_err(|e| e.to_string())?;
                if !report.is_homogeneous || report.degree != Some(expected.clone()) {
                    return Err(format!(
                        "{d}: block {:?} not homogeneous of degree {expected}",
                        factor.block
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Degree-zero bookkeeping of the unreduced total: `C(m+n, m) (m+n) / 2`.
pub fn unreduced_euler_power(max_total: u32) -> Check {
    for d in diagrams_up_to(max_total.min(10)) {
        let map = crate::macmahon::unreduced_total(&d).map_err(|e| e.to_string())?;
        let expected = d.triangulation_count() * BigInt::from(d.faces());
        if map.m1_power_times_2() != &expected {
            return Err(format!(
                "{d}: doubled power {} != {expected}",
                map.m1_power_times_2()
            ));
        }
        let two = BigInt::from(2);
        let power = map.m1_power();
        if power.denom() != &BigInt::one() && power.denom() != &two {
            return Err(format!("{d}: power {power} has denominator above 2"));
        }
    }
    Ok(())
}

fn run(name: &'static str, check: Check) -> PropertyCheck {
    match check {
        Ok(()) => PropertyCheck {
            name,
            pass: true,
            detail: String::new(),
        },
        Err(detail) => PropertyCheck {
            name,
            pass: false,
            detail,
        },
    }
}

/// Run every property sweep, bounding enumerations by `max_size`.
pub fn run_all(max_size: u32) -> Vec<PropertyCheck> {
    let s = max_size;
    vec![
        run("strip/enumeration-count-and-order", enumeration_count_and_order(s)),
        run(
            "strip/edge-type-complement-symmetry",
            edge_type_complement_symmetry(s.min(8)),
        ),
        run("macmahon/homogeneity-theorem", homogeneity_theorem(s)),
        run("macmahon/signature-consistency", signature_consistency(s)),
        run("macmahon/path-level-equivalence", path_level_equivalence(s)),
        run("macmahon/additivity", additivity(s)),
        run("macmahon/flip-symmetry", flip_symmetry(s)),
        run("macmahon/unreduced-euler-power", unreduced_euler_power(s)),
        run("flop/chain-products", flop_chain_products(s.saturating_sub(1))),
        run("qseries/macmahon-two-routes", macmahon_two_routes()),
        run("qseries/multiplication-algebra", series_multiplication_algebra()),
        run(
            "qseries/exponent-map-series-identity",
            exponent_map_series_identity(s),
        ),
        run("partial/restricted-count-identity", restricted_count_identity(s)),
        run("partial/factorization-identity", factorization_identity(s)),
        run("partial/block-homogeneity", block_homogeneity(s)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_suite_passes_at_desk_scale() {
        for check in run_all(6) {
            assert!(check.pass, "{}: {}", check.name, check.detail);
        }
    }
}
