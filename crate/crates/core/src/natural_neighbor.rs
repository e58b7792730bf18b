//! Natural-neighbor search.
//!
//! Rounds `r = 1, 2, ...` grow every point's neighborhood by one rank. Two
//! points are natural neighbors once each lies in the other's `r`-nearest
//! set. The search stops at the first round where every point has a natural
//! neighbor, or where the number of points without one has stopped changing
//! for `ceil(sqrt(r))` consecutive rounds. That round is the eigenvalue
//! `lambda`, which then serves as the neighborhood size of the training set.

use crate::error::{Error, Result};
use crate::spatial_index::{KdTree, NeighborList};

/// Upper bound on `lambda`, and so on the depth of every stored neighbor list.
const INITIAL_DEPTH: usize = 4;

pub const DEFAULT_MAX_LAMBDA: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NanSearchOptions {
    pub max_lambda: usize,
    /// Stop once the zero-neighbor count is unchanged for `ceil(sqrt(r))`
    /// rounds. When false, only "every point has a natural neighbor" (or the
    /// cap) ends the search.
    pub stable_fallback: bool,
}

impl Default for NanSearchOptions {
    fn default() -> Self {
        NanSearchOptions {
            max_lambda: DEFAULT_MAX_LAMBDA,
            stable_fallback: true,
        }
    }
}

/// How a query's natural-neighbor count is taken at test time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborCountRule {
    /// Training points that are in the query's `lambda`-NN set and would
    /// also hold the query in theirs.
    #[default]
    Mutual,
    /// Training points that would hold the query in their `lambda`-NN set,
    /// regardless of the query's own neighborhood.
    Reverse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalNeighborModel {
    lambda: usize,
    knn_lists: Vec<NeighborList>,
    nan_sets: Vec<Vec<usize>>,
    rounds_log: Vec<usize>,
    hit_cap: bool,
    /// Largest squared `lambda`-th neighbor distance.
    reach: f64,
}

impl NaturalNeighborModel {
    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.knn_lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knn_lists.is_empty()
    }

    /// `lambda`-nearest neighbors of training point `i`, nearest first.
    pub fn knn_list(&self, i: usize) -> &[crate::spatial_index::Neighbor] {
        &self.knn_lists[i]
    }

    pub fn knn_lists(&self) -> &[NeighborList] {
        &self.knn_lists
    }

    /// Natural neighbors of training point `i`, nearest first.
    pub fn nan_set(&self, i: usize) -> &[usize] {
        &self.nan_sets[i]
    }

    pub fn nan_sets(&self) -> &[Vec<usize>] {
        &self.nan_sets
    }

    pub fn nan_counts(&self) -> Vec<usize> {
        self.nan_sets.iter().map(Vec::len).collect()
    }

    /// Number of points without a natural neighbor after each round.
    pub fn rounds_log(&self) -> &[usize] {
        &self.rounds_log
    }

    /// True when the search stopped at `max_lambda` before reaching a stable state.
    pub fn hit_cap(&self) -> bool {
        self.hit_cap
    }

    /// Undirected natural-neighbor edges `(i, j, distance)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut edges = Vec::new();
        for (i, list) in self.knn_lists.iter().enumerate() {
            for n in list {
                if n.id > i && self.nan_sets[i].contains(&n.id) {
                    edges.push((i, n.id, n.distance()));
                }
            }
        }
        edges
    }

    /// Rebuilds a model from stored neighbor lists; natural-neighbor sets are
    /// re-derived from the lists at depth `lambda`.
    pub fn from_parts(
        lambda: usize,
        knn_lists: Vec<NeighborList>,
        rounds_log: Vec<usize>,
        hit_cap: bool,
    ) -> Result<Self> {
        if lambda == 0 {
            return Err(Error::InvalidArgument("lambda must be at least 1".into()));
        }
        let depth = lambda.min(knn_lists.len().saturating_sub(1));
        if let Some(bad) = knn_lists.iter().position(|l| l.len() != depth) {
            return Err(Error::InvalidArgument(format!(
                "neighbor list {bad} has {} entries, expected {depth}",
                knn_lists[bad].len()
            )));
        }
        let nan_sets = mutual_sets(&knn_lists, depth);
        let reach = reach(&knn_lists);
        Ok(NaturalNeighborModel {
            lambda,
            knn_lists,
            nan_sets,
            rounds_log,
            hit_cap,
            reach,
        })
    }

    /// Natural-neighbor count of an unseen query against the training set,
    /// using the trained `lambda`. The query notionally has the highest id,
    /// so it loses every distance tie.
    pub fn num_natural_neighbors(&self, index: &KdTree, query: &[f64], rule: NeighborCountRule) -> Result<usize> {
        let (count, _) = self.query_neighborhood(index, query, rule)?;
        Ok(count)
    }

    /// Like [`num_natural_neighbors`](Self::num_natural_neighbors) but also
    /// returns the query's `lambda`-NN list so callers can reuse it.
    pub fn query_neighborhood(
        &self,
        index: &KdTree,
        query: &[f64],
        rule: NeighborCountRule,
    ) -> Result<(usize, NeighborList)> {
        let depth = self.depth();
        let near = index.knn(query, depth, None)?;
        let holds_query = |id: usize, dist2: f64| self.knn_lists[id].last().is_none_or(|kth| dist2 < kth.dist2);
        let count = match rule {
            NeighborCountRule::Mutual => near.iter().filter(|n| holds_query(n.id, n.dist2)).count(),
            NeighborCountRule::Reverse => {
                let mut count = 0;
                index.for_each_within(query, self.reach, |j, d2| count += usize::from(holds_query(j, d2)))?;
                count
            }
        };
        Ok((count, near))
    }

    fn depth(&self) -> usize {
        self.knn_lists.first().map_or(0, Vec::len)
    }
}

fn mutual_sets(lists: &[NeighborList], depth: usize) -> Vec<Vec<usize>> {
    lists
        .iter()
        .enumerate()
        .map(|(i, list)| {
            list[..depth]
                .iter()
                .filter(|n| lists[n.id][..depth].iter().any(|b| b.id == i))
                .map(|n| n.id)
                .collect()
        })
        .collect()
}

/// Runs the natural-neighbor search over every point of `index`.
pub fn compute_nane(index: &KdTree, options: &NanSearchOptions) -> Result<NaturalNeighborModel> {
    let m = index.len();
    if m < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: m });
    }
    if options.max_lambda == 0 {
        return Err(Error::InvalidArgument("max_lambda must be at least 1".into()));
    }
    let cap = options.max_lambda.min(m - 1);

    // Lists grow on demand. A point that has found a natural neighbor keeps
    // it at every later depth, so each round only revisits the rest.
    let mut lists: Vec<NeighborList> = vec![Vec::new(); m];
    let extend = |lists: &mut [NeighborList], p: usize, depth: usize| -> Result<()> {
        if lists[p].len() < depth {
            let want = depth.max(2 * lists[p].len()).max(INITIAL_DEPTH).min(cap);
            lists[p] = index.knn(index.point(p), want, Some(p))?;
        }
        Ok(())
    };
    let mut unresolved: Vec<usize> = index.leaf_order().to_vec();
    let mut rounds_log = Vec::new();
    let mut unchanged = 0usize;
    let mut hit_cap = false;

    let mut r = 0;
    loop {
        r += 1;
        let mut still = Vec::with_capacity(unresolved.len());
        for &p in &unresolved {
            extend(&mut lists, p, r)?;
            let mut found = false;
            for t in 0..r {
                let j = lists[p][t].id;
                extend(&mut lists, j, r)?;
                if lists[j][..r].iter().any(|n| n.id == p) {
                    found = true;
                    break;
                }
            }
            if !found {
                still.push(p);
            }
        }
        unresolved = still;
        let zero = unresolved.len();
        let previous = rounds_log.last().copied();
        rounds_log.push(zero);
        if zero == 0 {
            break;
        }
        if previous == Some(zero) {
            unchanged += 1;
        } else {
            unchanged = 0;
        }
        if options.stable_fallback && unchanged >= ceil_sqrt(r) {
            break;
        }
        if r == cap {
            hit_cap = true;
            log::warn!("natural-neighbor search reached the cap lambda = {cap} with {zero} points still unconnected");
            break;
        }
    }

    let lambda = r;
    for &p in index.leaf_order() {
        let list = &mut lists[p];
        if list.len() >= lambda {
            list.truncate(lambda);
        } else {
            *list = index.knn(index.point(p), lambda, Some(p))?;
        }
    }
    let nan_sets = mutual_sets(&lists, lambda);
    let reach = reach(&lists);
    Ok(NaturalNeighborModel {
        lambda,
        knn_lists: lists,
        nan_sets,
        rounds_log,
        hit_cap,
        reach,
    })
}

fn reach(lists: &[NeighborList]) -> f64 {
    lists
        .iter()
        .map(|l| l.last().map_or(f64::INFINITY, |n| n.dist2))
        .fold(0.0, f64::max)
}

fn ceil_sqrt(r: usize) -> usize {
    let mut s = (r as f64).sqrt() as usize;
    while s * s < r {
        s += 1;
    }
    while s > 0 && (s - 1) * (s - 1) >= r {
        s -= 1;
    }
    s
}
