//! Seeded generators for the four benchmark families. All maximization
//! families are stored negated so every instance minimizes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::instance::{MilpInstance, Sense};
use crate::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    SetCover,
    CombAuction,
    FacilityLocation,
    IndepSet,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::SetCover, Family::CombAuction, Family::FacilityLocation, Family::IndepSet];

    pub fn name(self) -> &'static str {
        match self {
            Family::SetCover => "set-cover",
            Family::CombAuction => "comb-auction",
            Family::FacilityLocation => "facility-location",
            Family::IndepSet => "indep-set",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Family::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Families whose optima are typically highly symmetric; their training
    /// pools are augmented by enumerating all optimal assignments.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Family::SetCover | Family::IndepSet)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyParams {
    SetCover { rows: usize, cols: usize, density: f64 },
    CombAuction { items: usize, bids: usize },
    FacilityLocation { customers: usize, facilities: usize, capacity_ratio: f64 },
    IndepSet { nodes: usize, affinity: usize },
}

impl FamilyParams {
    /// Desk-scale defaults.
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::SetCover => FamilyParams::SetCover { rows: 100, cols: 200, density: 0.05 },
            Family::CombAuction => FamilyParams::CombAuction { items: 50, bids: 150 },
            Family::FacilityLocation => {
                FamilyParams::FacilityLocation { customers: 15, facilities: 15, capacity_ratio: 5.0 }
            }
            Family::IndepSet => FamilyParams::IndepSet { nodes: 120, affinity: 4 },
        }
    }

    pub fn family(&self) -> Family {
        match self {
            FamilyParams::SetCover { .. } => Family::SetCover,
            FamilyParams::CombAuction { .. } => Family::CombAuction,
            FamilyParams::FacilityLocation { .. } => Family::FacilityLocation,
            FamilyParams::IndepSet { .. } => Family::IndepSet,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub params: FamilyParams,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn new(params: FamilyParams, seed: u64) -> Self {
        GeneratorConfig { params, seed }
    }

    pub fn default_for(family: Family, seed: u64) -> Self {
        GeneratorConfig { params: FamilyParams::default_for(family), seed }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GenerateError {
    InvalidConfig(&'static str),
    InfeasibleConstruction(&'static str),
}

impl fmt::Display for GenerateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenerateError::InvalidConfig(why) => write!(f, "invalid generator config: {why}"),
            GenerateError::InfeasibleConstruction(why) => write!(f, "cannot construct instance: {why}"),
        }
    }
}

pub fn generate(config: &GeneratorConfig) -> Result<MilpInstance, GenerateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut inst = match config.params {
        FamilyParams::SetCover { rows, cols, density } => set_cover(&mut rng, rows, cols, density)?,
        FamilyParams::CombAuction { items, bids } => comb_auction(&mut rng, items, bids)?,
        FamilyParams::FacilityLocation { customers, facilities, capacity_ratio } => {
            facility_location(&mut rng, customers, facilities, capacity_ratio)?
        }
        FamilyParams::IndepSet { nodes, affinity } => {
            let edges = barabasi_albert(&mut rng, nodes, affinity)?;
            independent_set(nodes, &edges)
        }
    };
    inst.name = format!("{}-{}", config.params.family().name(), config.seed);
    Ok(inst)
}

fn set_cover(rng: &mut ChaCha8Rng, rows: usize, cols: usize, density: f64) -> Result<MilpInstance, GenerateError> {
    if rows == 0 || cols == 0 {
        return Err(GenerateError::InvalidConfig("set cover needs at least one row and column"));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(GenerateError::InvalidConfig("density must lie in (0, 1]"));
    }
    if cols < 2 {
        return Err(GenerateError::InfeasibleConstruction("every row needs two distinct covering columns"));
    }
    let target = (num::round(rows as f64 * cols as f64 * density) as usize).clamp(2 * rows, rows * cols);
    let mut entries: BTreeSet<(usize, usize)> = BTreeSet::new();
    let all_cols: Vec<usize> = (0..cols).collect();
    for i in 0..rows {
        for &j in all_cols.choose_multiple(rng, 2) {
            entries.insert((i, j));
        }
    }
    let mut used = vec![false; cols];
    for &(_, j) in &entries {
        used[j] = true;
    }
    for j in 0..cols {
        if !used[j] {
            let i = rng.gen_range(0..rows);
            entries.insert((i, j));
        }
    }
    // bounded rejection sampling for the remaining nonzeros
    let mut attempts = 0usize;
    while entries.len() < target && attempts < 50 * target {
        attempts += 1;
        entries.insert((rng.gen_range(0..rows), rng.gen_range(0..cols)));
    }
    let mut inst = MilpInstance::new("", cols);
    for j in 0..cols {
        inst.objective[j] = rng.gen_range(1..=100) as f64;
        inst.make_binary(j);
    }
    let mut row_entries = vec![Vec::new(); rows];
    for (i, j) in entries {
        row_entries[i].push((j, 1.0));
    }
    for row in row_entries {
        if row.len() < 2 {
            return Err(GenerateError::InfeasibleConstruction("row with fewer than two columns"));
        }
        inst.add_row(row, Sense::Ge, 1.0);
    }
    Ok(inst)
}

fn comb_auction(rng: &mut ChaCha8Rng, items: usize, bids: usize) -> Result<MilpInstance, GenerateError> {
    if items == 0 || bids == 0 {
        return Err(GenerateError::InvalidConfig("auction needs items and bids"));
    }
    let values: Vec<f64> = (0..items).map(|_| rng.gen_range(1..=100) as f64).collect();
    let mut inst = MilpInstance::new("", bids);
    let mut bidders_of = vec![Vec::new(); items];
    let all_items: Vec<usize> = (0..items).collect();
    for b in 0..bids {
        let mut size = 1;
        while size < items.min(5) && rng.gen_bool(0.6) {
            size += 1;
        }
        let mut bundle: Vec<usize> = all_items.choose_multiple(rng, size).copied().collect();
        bundle.sort_unstable();
        let base: f64 = bundle.iter().map(|&i| values[i]).sum();
        let price = num::round(base * rng.gen_range(1.0..1.5));
        inst.objective[b] = -price;
        inst.make_binary(b);
        for i in bundle {
            bidders_of[i].push(b);
        }
    }
    for bidders in bidders_of {
        if !bidders.is_empty() {
            inst.add_row(bidders.into_iter().map(|b| (b, 1.0)).collect(), Sense::Le, 1.0);
        }
    }
    Ok(inst)
}

/// Capacitated facility location. Columns: `x[i][j]` (customer-major,
/// continuous in `[0, 1]`, share of demand `i` served by `j`), then the
/// open/closed binaries `y[j]`.
fn facility_location(
    rng: &mut ChaCha8Rng,
    customers: usize,
    facilities: usize,
    ratio: f64,
) -> Result<MilpInstance, GenerateError> {
    if customers == 0 || facilities == 0 {
        return Err(GenerateError::InvalidConfig("facility location needs customers and facilities"));
    }
    if !(ratio >= 1.0) {
        return Err(GenerateError::InvalidConfig("capacity ratio must be at least 1"));
    }
    let point = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
    let cust: Vec<(f64, f64)> = (0..customers).map(|_| point(rng)).collect();
    let fac: Vec<(f64, f64)> = (0..facilities).map(|_| point(rng)).collect();
    let demand: Vec<f64> = (0..customers).map(|_| rng.gen_range(5..=35) as f64).collect();
    let raw_cap: Vec<f64> = (0..facilities).map(|_| rng.gen_range(10..=160) as f64).collect();
    let fixed: Vec<f64> = raw_cap
        .iter()
        .map(|&s| num::floor(rng.gen_range(100.0..110.0) * num::sqrt(s) + rng.gen_range(0.0..90.0)))
        .collect();
    let total_demand: f64 = demand.iter().sum();
    let raw_total: f64 = raw_cap.iter().sum();
    let mut cap: Vec<f64> = raw_cap.iter().map(|s| num::ceil(s * ratio * total_demand / raw_total)).collect();
    if cap.iter().sum::<f64>() < total_demand {
        return Err(GenerateError::InfeasibleConstruction("capacity below demand"));
    }
    for c in cap.iter_mut() {
        *c = c.max(1.0);
    }
    let x = |i: usize, j: usize| i * facilities + j;
    let y = |j: usize| customers * facilities + j;
    let mut inst = MilpInstance::new("", customers * facilities + facilities);
    for i in 0..customers {
        for j in 0..facilities {
            let (dx, dy) = (cust[i].0 - fac[j].0, cust[i].1 - fac[j].1);
            inst.objective[x(i, j)] = num::round(10.0 * demand[i] * num::sqrt(dx * dx + dy * dy));
            inst.upper[x(i, j)] = 1.0;
        }
    }
    for j in 0..facilities {
        inst.objective[y(j)] = fixed[j];
        inst.make_binary(y(j));
    }
    for i in 0..customers {
        inst.add_row((0..facilities).map(|j| (x(i, j), 1.0)).collect(), Sense::Ge, 1.0);
    }
    for j in 0..facilities {
        let mut row: Vec<(usize, f64)> = (0..customers).map(|i| (x(i, j), demand[i])).collect();
        row.push((y(j), -cap[j]));
        inst.add_row(row, Sense::Le, 0.0);
    }
    inst.add_row((0..facilities).map(|j| (y(j), cap[j])).collect(), Sense::Ge, total_demand);
    for i in 0..customers {
        for j in 0..facilities {
            inst.add_row(vec![(x(i, j), 1.0), (y(j), -1.0)], Sense::Le, 0.0);
        }
    }
    Ok(inst)
}

/// Preferential-attachment graph: a clique on the first `affinity + 1` nodes,
/// then each new node links to `affinity` distinct earlier nodes chosen with
/// probability proportional to degree.
pub fn barabasi_albert(
    rng: &mut ChaCha8Rng,
    nodes: usize,
    affinity: usize,
) -> Result<Vec<(usize, usize)>, GenerateError> {
    if nodes == 0 || affinity == 0 {
        return Err(GenerateError::InvalidConfig("graph needs nodes and positive affinity"));
    }
    if affinity >= nodes {
        return Err(GenerateError::InfeasibleConstruction("affinity must be below the node count"));
    }
    let mut edges = Vec::new();
    let mut endpoints: Vec<usize> = Vec::new();
    for u in 0..=affinity {
        for v in u + 1..=affinity {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    for v in affinity + 1..nodes {
        let mut targets = BTreeSet::new();
        while targets.len() < affinity {
            targets.insert(endpoints[rng.gen_range(0..endpoints.len())]);
        }
        for u in targets {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    Ok(edges)
}

/// Maximum independent set with unit weights, as `min -sum x` over a greedy
/// clique cover of the edges (one `<= 1` row per clique).
pub fn independent_set(nodes: usize, edges: &[(usize, usize)]) -> MilpInstance {
    let mut adj = vec![BTreeSet::new(); nodes];
    for &(u, v) in edges {
        if u != v {
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let mut remaining = adj.clone();
    let mut order: Vec<usize> = (0..nodes).collect();
    order.sort_by(|&a, &b| adj[b].len().cmp(&adj[a].len()).then(a.cmp(&b)));
    let mut inst = MilpInstance::new("", nodes);
    for j in 0..nodes {
        inst.objective[j] = -1.0;
        inst.make_binary(j);
    }
    for &u in &order {
        while let Some(&first) = remaining[u].iter().next() {
            let mut clique = vec![u, first];
            for &w in remaining[u].iter().skip(1) {
                if clique.iter().all(|&c| c == u || adj[c].contains(&w)) {
                    clique.push(w);
                }
            }
            for a in 0..clique.len() {
                for b in a + 1..clique.len() {
                    remaining[clique[a]].remove(&clique[b]);
                    remaining[clique[b]].remove(&clique[a]);
                }
            }
            clique.sort_unstable();
            inst.add_row(clique.into_iter().map(|v| (v, 1.0)).collect(), Sense::Le, 1.0);
        }
    }
    inst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn covers_all_edges(inst: &MilpInstance, edges: &[(usize, usize)]) -> bool {
        edges
            .iter()
            .all(|&(u, v)| inst.rows.iter().any(|r| r.iter().any(|&(j, _)| j == u) && r.iter().any(|&(j, _)| j == v)))
    }

    #[test]
    fn set_cover_rows_have_two_columns_and_all_ones_is_feasible() {
        let cfg = GeneratorConfig::new(FamilyParams::SetCover { rows: 10, cols: 20, density: 0.2 }, 7);
        let inst = generate(&cfg).unwrap();
        inst.validate().unwrap();
        assert_eq!(inst.num_rows(), 10);
        assert!(inst.rows.iter().all(|r| r.len() >= 2));
        assert!(inst.is_feasible(&vec![1.0; 20], 0.0));
        assert_eq!(inst.nnz(), 40);
    }

    #[test]
    fn generation_is_deterministic() {
        for family in Family::ALL {
            let cfg = GeneratorConfig::default_for(family, 11);
            assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap(), "{family:?}");
            let other = GeneratorConfig::default_for(family, 12);
            assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
        }
    }

    #[test]
    fn defaults_are_valid_and_trivially_feasible() {
        for family in Family::ALL {
            let inst = generate(&GeneratorConfig::default_for(family, 3)).unwrap();
            inst.validate().unwrap();
            assert!(inst.candidates().iter().all(|&j| inst.lower[j] == 0.0 && inst.upper[j] == 1.0));
            let n = inst.num_vars();
            let point: Vec<f64> = match family {
                Family::SetCover => vec![1.0; n],
                Family::CombAuction | Family::IndepSet => vec![0.0; n],
                Family::FacilityLocation => {
                    let FamilyParams::FacilityLocation { customers, facilities, .. } =
                        FamilyParams::default_for(family)
                    else {
                        unreachable!()
                    };
                    let cap: Vec<f64> = (0..facilities).map(|j| -inst.rows[customers + j].last().unwrap().1).collect();
                    let total: f64 = cap.iter().sum();
                    let mut p = vec![0.0; n];
                    for i in 0..customers {
                        for j in 0..facilities {
                            p[i * facilities + j] = cap[j] / total;
                        }
                    }
                    for j in 0..facilities {
                        p[customers * facilities + j] = 1.0;
                    }
                    p
                }
            };
            assert!(inst.is_feasible(&point, 1e-9), "{family:?}");
        }
    }

    #[test]
    fn clique_cover_covers_every_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let edges = barabasi_albert(&mut rng, 30, 3).unwrap();
        let inst = independent_set(30, &edges);
        assert!(covers_all_edges(&inst, &edges));
        // every row is a clique of the graph
        for row in &inst.rows {
            for a in 0..row.len() {
                for b in a + 1..row.len() {
                    let (u, v) = (row[a].0, row[b].0);
                    assert!(edges.contains(&(u, v)) || edges.contains(&(v, u)));
                }
            }
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        let bad = GeneratorConfig::new(FamilyParams::SetCover { rows: 3, cols: 5, density: 0.0 }, 1);
        assert!(matches!(generate(&bad), Err(GenerateError::InvalidConfig(_))));
        let one_col = GeneratorConfig::new(FamilyParams::SetCover { rows: 3, cols: 1, density: 1.0 }, 1);
        assert!(matches!(generate(&one_col), Err(GenerateError::InfeasibleConstruction(_))));
        let dense_graph = GeneratorConfig::new(FamilyParams::IndepSet { nodes: 4, affinity: 4 }, 1);
        assert!(matches!(generate(&dense_graph), Err(GenerateError::InfeasibleConstruction(_))));
    }
}
