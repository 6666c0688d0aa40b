use super::{CliqueSet, Graph, NodeId};
use crate::error::{Error, Result};

/// Largest `binomial(n, p)` the clique oracles accept.
pub const ORACLE_WORK_CAP: f64 = 1e9;

fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn check_work(g: &Graph, p: usize) -> Result<()> {
    if p < 2 {
        return Err(Error::invalid("p", format!("clique size must be >= 2, got {p}")));
    }
    let work = binomial_f64(g.n(), p);
    if work > ORACLE_WORK_CAP {
        return Err(Error::OracleTooLarge { work });
    }
    Ok(())
}

/// Walks cliques in ascending node order. `visit` returns false to stop early.
fn walk_cliques(
    g: &Graph,
    p: usize,
    current: &mut Vec<NodeId>,
    candidates: &[NodeId],
    visit: &mut dyn FnMut(&[NodeId]) -> bool,
) -> bool {
    if current.len() == p {
        return visit(current);
    }
    let need = p - current.len();
    for (i, &v) in candidates.iter().enumerate() {
        if candidates.len() - i < need {
            break;
        }
        let next: Vec<NodeId> = candidates[i + 1..]
            .iter()
            .copied()
            .filter(|&w| g.has_edge(v, w))
            .collect();
        current.push(v);
        let go_on = walk_cliques(g, p, current, &next, visit);
        current.pop();
        if !go_on {
            return false;
        }
    }
    true
}

/// Every `p`-clique of `g`.
pub fn oracle_cliques(g: &Graph, p: usize) -> Result<CliqueSet> {
    check_work(g, p)?;
    let mut flat = Vec::new();
    let all: Vec<NodeId> = (0..g.n() as NodeId).collect();
    walk_cliques(g, p, &mut Vec::with_capacity(p), &all, &mut |c| {
        flat.extend_from_slice(c);
        true
    });
    Ok(CliqueSet::from_canonical_flat(p, flat))
}

/// Whether `g` has a `p`-clique, stopping at the first one.
pub fn oracle_clique_exists(g: &Graph, p: usize) -> Result<bool> {
    check_work(g, p)?;
    let all: Vec<NodeId> = (0..g.n() as NodeId).collect();
    let mut found = false;
    walk_cliques(g, p, &mut Vec::with_capacity(p), &all, &mut |_| {
        found = true;
        false
    });
    Ok(found)
}

/// Whether some listed `p`-clique grows into a `(p + t)`-clique of `g`.
pub fn oracle_has_extension(g: &Graph, listed: &CliqueSet, t: usize) -> bool {
    listed.iter().any(|k| {
        let common: Vec<NodeId> = (0..g.n() as NodeId)
            .filter(|&w| k.iter().all(|&u| g.has_edge(u, w)))
            .collect();
        if t == 0 {
            return true;
        }
        let mut found = false;
        walk_cliques(g, t, &mut Vec::with_capacity(t), &common, &mut |_| {
            found = true;
            false
        });
        found
    })
}

fn is_bipartite(g: &Graph) -> bool {
    let mut side = vec![u8::MAX; g.n()];
    for s in 0..g.n() {
        if side[s] != u8::MAX {
            continue;
        }
        side[s] = 0;
        let mut stack = vec![s as NodeId];
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if side[w as usize] == u8::MAX {
                    side[w as usize] = 1 - side[u as usize];
                    stack.push(w);
                } else if side[w as usize] == side[u as usize] {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether `g` has a simple cycle of exactly `len` nodes.
///
/// Paths start at their smallest node and only visit larger ones, so each
/// cycle is explored from one start. Exponential; meant for small graphs.
pub fn oracle_has_cycle(g: &Graph, len: usize) -> bool {
    if len < 3 || len > g.n() {
        return false;
    }
    if len % 2 == 1 && is_bipartite(g) {
        return false;
    }
    let mut on_path = vec![false; g.n()];
    let mut path = Vec::with_capacity(len);
    (0..g.n() as NodeId).any(|s| {
        on_path[s as usize] = true;
        path.push(s);
        let hit = extend_path(g, s, len, &mut path, &mut on_path);
        path.pop();
        on_path[s as usize] = false;
        hit
    })
}

fn extend_path(
    g: &Graph,
    start: NodeId,
    len: usize,
    path: &mut Vec<NodeId>,
    on_path: &mut [bool],
) -> bool {
    let tail = *path.last().unwrap();
    if path.len() == len {
        return g.has_edge(tail, start);
    }
    for &w in g.neighbors(tail) {
        if w <= start || on_path[w as usize] {
            continue;
        }
        on_path[w as usize] = true;
        path.push(w);
        let hit = extend_path(g, start, len, path, on_path);
        path.pop();
        on_path[w as usize] = false;
        if hit {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GenKind, GenSpec};

    fn complete(n: usize) -> Graph {
        generate(&GenSpec::new(GenKind::Complete, n)).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        generate(&GenSpec::new(GenKind::Cycle, n)).unwrap()
    }

    #[test]
    fn triangles_of_k4() {
        assert_eq!(oracle_cliques(&complete(4), 3).unwrap().len(), 4);
    }

    #[test]
    fn c5_has_no_triangle() {
        assert!(oracle_cliques(&cycle(5), 3).unwrap().is_empty());
        assert!(!oracle_clique_exists(&cycle(5), 3).unwrap());
    }

    #[test]
    fn four_cliques_match_subset_scan() {
        let g = generate(&GenSpec::gnp(16, 0.5, 7)).unwrap();
        let mut direct = Vec::new();
        for a in 0..16u32 {
            for b in a + 1..16 {
                for c in b + 1..16 {
                    for d in c + 1..16 {
                        if g.is_clique(&[a, b, c, d]) {
                            direct.push([a, b, c, d]);
                        }
                    }
                }
            }
        }
        assert_eq!(oracle_cliques(&g, 4).unwrap(), CliqueSet::from_members(4, direct));
    }

    #[test]
    fn refuses_huge_enumerations() {
        let g = Graph::empty(2000);
        assert!(matches!(oracle_cliques(&g, 5), Err(Error::OracleTooLarge { .. })));
        assert!(oracle_cliques(&g, 1).is_err());
    }

    #[test]
    fn extension_of_k5() {
        let g = complete(5);
        let tri = oracle_cliques(&g, 3).unwrap();
        assert!(oracle_has_extension(&g, &tri, 2));
        assert!(!oracle_has_extension(&g, &CliqueSet::new(3), 2));
    }

    #[test]
    fn extension_is_relative_to_the_listed_set() {
        // Two disjoint K4s on {0..3} and {4..7}, plus a triangle {7, 8, 9}
        // that sits in neither K4.
        let mut edges = Vec::new();
        for base in [0u32, 4] {
            for a in 0..4 {
                for b in a + 1..4 {
                    edges.push((base + a, base + b));
                }
            }
        }
        edges.extend([(7, 8), (7, 9), (8, 9)]);
        let g = Graph::from_edges(10, &edges).unwrap();
        let listed = CliqueSet::from_members(3, [[7u32, 8, 9]]);
        assert!(!oracle_has_extension(&g, &listed, 1));
        let inside = CliqueSet::from_members(3, [[4u32, 5, 6]]);
        assert!(oracle_has_extension(&g, &inside, 1));
    }

    #[test]
    fn cycle_lengths() {
        let c6 = cycle(6);
        assert!(oracle_has_cycle(&c6, 6));
        assert!(!oracle_has_cycle(&c6, 5));
        let path = generate(&GenSpec::new(GenKind::Path, 12)).unwrap();
        assert!((3..=12).all(|len| !oracle_has_cycle(&path, len)));
    }

    #[test]
    fn four_cycles_match_common_neighbor_count() {
        for seed in 0..6 {
            let g = generate(&GenSpec::gnp(48, 0.15, 3 + seed)).unwrap();
            let mut count_based = false;
            for u in 0..48u32 {
                for v in u + 1..48 {
                    let common = (0..48u32).filter(|&w| g.has_edge(u, w) && g.has_edge(v, w)).count();
                    count_based |= common >= 2;
                }
            }
            assert_eq!(oracle_has_cycle(&g, 4), count_based, "seed {}", 3 + seed);
        }
    }
}
