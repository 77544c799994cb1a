//! Component selection: merge and prune the pool, cluster components by
//! their error profiles on the sliding window, keep the most accurate
//! members of each cluster, then pick the active set greedily by maximal
//! marginal relevance,
//!
//! `argmax_i [ lambda * acc(i) - (1 - lambda) * max_{j in S} sim(i, j) ]`.

use rayon::prelude::*;

use crate::diversity::{joint_counts, similarity, MeasureKind, OracleVector};
use crate::stream::Instance;
use crate::tree::HoeffdingTree;
use crate::{Error, Result};

pub type ComponentId = u64;

pub const KMEANS_MAX_ITERATIONS: usize = 100;

/// One ensemble member.
#[derive(Debug, Clone)]
pub struct ComponentRecord {
    pub id: ComponentId,
    pub model: HoeffdingTree,
    /// Accuracy over the sliding window at the last refresh.
    pub accuracy: f64,
    pub oracle: OracleVector,
    pub birth_index: u64,
}

impl ComponentRecord {
    pub fn new(id: ComponentId, model: HoeffdingTree, oracle_size: usize, birth_index: u64) -> Self {
        Self {
            id,
            model,
            accuracy: 0.0,
            oracle: OracleVector::new(oracle_size),
            birth_index,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionParams {
    pub lambda: f64,
    /// `pool_s`
    pub pool_size: usize,
    /// `cls_s`
    pub per_cluster: usize,
    /// `slc_s`
    pub active_size: usize,
    /// `error_s`
    pub oracle_size: usize,
    pub measure: MeasureKind,
}

impl Default for SelectionParams {
    fn default() -> Self {
        Self {
            lambda: 0.6,
            pool_size: 500,
            per_cluster: 10,
            active_size: 10,
            oracle_size: 50,
            measure: MeasureKind::DoubleFault,
        }
    }
}

impl SelectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if self.pool_size == 0 || self.per_cluster == 0 || self.active_size == 0 || self.oracle_size == 0 {
            return Err(Error::config("selection sizes must all be at least 1"));
        }
        Ok(())
    }
}

/// Instrumentation collected during one selection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelectionStats {
    pub similarity_evals: u64,
    pub kmeans_iterations: usize,
    pub candidates: usize,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub active: Vec<ComponentRecord>,
    pub reserve: Vec<ComponentRecord>,
    pub pruned: Vec<ComponentId>,
    pub stats: SelectionStats,
}

fn by_accuracy(a: &ComponentRecord, b: &ComponentRecord) -> std::cmp::Ordering {
    b.accuracy.total_cmp(&a.accuracy).then(a.id.cmp(&b.id))
}

/// Sorts by accuracy (descending, lower id first on ties) and drops the
/// tail while at least `pool_size` components remain. Returns the
/// survivors and the removed components.
pub fn prune_pool(
    mut components: Vec<ComponentRecord>,
    pool_size: usize,
) -> (Vec<ComponentRecord>, Vec<ComponentRecord>) {
    components.sort_by(by_accuracy);
    let mut pruned = Vec::new();
    while components.len() >= pool_size {
        match components.pop() {
            Some(c) => pruned.push(c),
            None => break,
        }
    }
    (components, pruned)
}

/// Binary error vector of `model` over `window` (1.0 = wrong).
pub fn error_profile(model: &HoeffdingTree, window: &[Instance]) -> Vec<f64> {
    window
        .iter()
        .map(|inst| f64::from(u8::from(model.predict_unchecked(&inst.features) != inst.label)))
        .collect()
}

/// Replays `window` through every component, refreshing its windowed
/// accuracy and its oracle (the last `oracle_size` outcomes). Returns the
/// error profiles in component order.
pub fn refresh_from_window(
    components: &mut [ComponentRecord],
    window: &[Instance],
    oracle_size: usize,
) -> Vec<Vec<f64>> {
    components
        .par_iter_mut()
        .map(|c| {
            let profile = error_profile(&c.model, window);
            let errors: f64 = profile.iter().sum();
            c.accuracy = if window.is_empty() {
                0.0
            } else {
                1.0 - errors / window.len() as f64
            };
            let tail = profile.len().saturating_sub(oracle_size);
            c.oracle = OracleVector::from_bits(oracle_size, profile[tail..].iter().map(|&e| e == 0.0));
            profile
        })
        .collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Two-means clustering. Centroids start at the two most distant profiles
/// (first such pair in index order); Lloyd iterations run until the
/// assignment is stable or `max_iterations` is reached. Returns the cluster
/// of every profile and the iteration count.
pub fn kmeans_two(profiles: &[Vec<f64>], max_iterations: usize) -> (Vec<usize>, usize) {
    let n = profiles.len();
    if n < 2 {
        return (vec![0; n], 0);
    }
    let mut far = (0, 1, squared_distance(&profiles[0], &profiles[1]));
    for i in 0..n {
        for j in i + 1..n {
            let d = squared_distance(&profiles[i], &profiles[j]);
            if d > far.2 {
                far = (i, j, d);
            }
        }
    }
    if far.2 == 0.0 {
        return (vec![0; n], 0);
    }
    let mut centroids = [profiles[far.0].clone(), profiles[far.1].clone()];
    let mut assignment = vec![usize::MAX; n];
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let next: Vec<usize> = profiles
            .iter()
            .map(|p| {
                let d0 = squared_distance(p, &centroids[0]);
                let d1 = squared_distance(p, &centroids[1]);
                usize::from(d1 < d0)
            })
            .collect();
        if next == assignment {
            break;
        }
        assignment = next;
        for (k, centroid) in centroids.iter_mut().enumerate() {
            let members: Vec<&Vec<f64>> = profiles
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == k)
                .map(|(p, _)| p)
                .collect();
            if members.is_empty() {
                continue;
            }
            let m = members.len() as f64;
            for (d, c) in centroid.iter_mut().enumerate() {
                *c = members.iter().map(|p| p[d]).sum::<f64>() / m;
            }
        }
    }
    (assignment, iterations)
}

fn split_by_assignment(
    components: Vec<ComponentRecord>,
    assignment: &[usize],
) -> [Vec<ComponentRecord>; 2] {
    let mut clusters = [Vec::new(), Vec::new()];
    for (c, &k) in components.into_iter().zip(assignment) {
        clusters[k].push(c);
    }
    clusters
}

/// Clusters components into two groups by their error profiles on
/// `window`. Fewer than two components yield a single cluster.
pub fn cluster_by_error(
    components: Vec<ComponentRecord>,
    window: &[Instance],
) -> Result<[Vec<ComponentRecord>; 2]> {
    if window.is_empty() {
        return Err(Error::contract("clustering needs a non-empty window"));
    }
    let profiles: Vec<Vec<f64>> = components
        .iter()
        .map(|c| error_profile(&c.model, window))
        .collect();
    let (assignment, _) = kmeans_two(&profiles, KMEANS_MAX_ITERATIONS);
    Ok(split_by_assignment(components, &assignment))
}

/// Keeps the `per_cluster` most accurate members of each cluster. Returns
/// `(candidates, rest)`.
pub fn pick_top_per_cluster(
    clusters: [Vec<ComponentRecord>; 2],
    per_cluster: usize,
) -> (Vec<ComponentRecord>, Vec<ComponentRecord>) {
    let mut candidates = Vec::new();
    let mut rest = Vec::new();
    for mut cluster in clusters {
        cluster.sort_by(by_accuracy);
        let tail = cluster.split_off(per_cluster.min(cluster.len()));
        candidates.extend(cluster);
        rest.extend(tail);
    }
    (candidates, rest)
}

/// Greedy MMR ordering over precomputed accuracies and similarities.
///
/// The first pick is the accuracy argmax; every later pick maximises
/// `lambda * acc - (1 - lambda) * max_sim_to_selected`. Ties go to the
/// lower id. Returns indices into the inputs in pick order.
pub fn mmr_rank(
    accuracies: &[f64],
    ids: &[ComponentId],
    similarity: &[Vec<f64>],
    k: usize,
    lambda: f64,
) -> Vec<usize> {
    let n = accuracies.len();
    let k = k.min(n);
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut remaining: Vec<usize> = (0..n).collect();
    // running max similarity of each candidate to the selected set
    let mut max_sim = vec![0.0f64; n];
    while selected.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for (pos, &i) in remaining.iter().enumerate() {
            let score = if selected.is_empty() {
                accuracies[i]
            } else {
                lambda * accuracies[i] - (1.0 - lambda) * max_sim[i]
            };
            let better = match best {
                None => true,
                Some((bp, bs)) => score > bs || (score == bs && ids[i] < ids[remaining[bp]]),
            };
            if better {
                best = Some((pos, score));
            }
        }
        let (pos, _) = best.expect("remaining is non-empty while selected < k");
        let chosen = remaining.swap_remove(pos);
        selected.push(chosen);
        for &i in &remaining {
            max_sim[i] = max_sim[i].max(similarity[i][chosen]);
        }
    }
    selected
}

/// Pairwise similarity matrix of the candidates' oracles. A component with
/// an empty oracle is treated as similarity 0 to everyone. Returns the
/// matrix and the number of pair evaluations.
pub fn similarity_matrix(
    candidates: &[ComponentRecord],
    measure: MeasureKind,
) -> Result<(Vec<Vec<f64>>, u64)> {
    let n = candidates.len();
    let mut m = vec![vec![0.0; n]; n];
    let mut evals = 0;
    for i in 0..n {
        for j in i + 1..n {
            evals += 1;
            let (a, b) = (&candidates[i].oracle, &candidates[j].oracle);
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let s = similarity(measure, &joint_counts(a, b)?)?;
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    Ok((m, evals))
}

#[derive(Debug, Clone)]
pub struct MmrOutcome {
    pub selected: Vec<ComponentRecord>,
    pub rest: Vec<ComponentRecord>,
    pub similarity_evals: u64,
}

pub fn mmr_select(
    candidates: Vec<ComponentRecord>,
    select: usize,
    lambda: f64,
    measure: MeasureKind,
) -> Result<MmrOutcome> {
    if candidates.is_empty() {
        return Err(Error::contract("MMR selection over an empty candidate set"));
    }
    let k = select.min(candidates.len());
    let n = candidates.len();
    // one pick needs no similarities at all
    let (sim, evals) = if k <= 1 {
        (vec![vec![0.0; n]; n], 0)
    } else {
        similarity_matrix(&candidates, measure)?
    };
    let accuracies: Vec<f64> = candidates.iter().map(|c| c.accuracy).collect();
    let ids: Vec<ComponentId> = candidates.iter().map(|c| c.id).collect();
    let order = mmr_rank(&accuracies, &ids, &sim, k, lambda);

    let mut slots: Vec<Option<ComponentRecord>> = candidates.into_iter().map(Some).collect();
    let selected = order.iter().map(|&i| slots[i].take().unwrap()).collect();
    let rest = slots.into_iter().flatten().collect();
    Ok(MmrOutcome {
        selected,
        rest,
        similarity_evals: evals,
    })
}

/// Full selection over the union of the reserve pool and the active set.
pub fn select_components(
    pool: Vec<ComponentRecord>,
    active: Vec<ComponentRecord>,
    window: &[Instance],
    params: &SelectionParams,
) -> Result<Selection> {
    params.validate()?;
    if window.is_empty() {
        return Err(Error::contract("selection needs a non-empty window"));
    }
    let mut all: Vec<ComponentRecord> = active.into_iter().chain(pool).collect();
    if all.is_empty() {
        return Err(Error::contract("selection over an empty component set"));
    }
    let profiles = refresh_from_window(&mut all, window, params.oracle_size);
    let mut paired: Vec<(ComponentRecord, Vec<f64>)> = all.into_iter().zip(profiles).collect();
    paired.sort_by(|a, b| by_accuracy(&a.0, &b.0));
    let mut pruned = Vec::new();
    while paired.len() >= params.pool_size {
        if let Some((c, _)) = paired.pop() {
            pruned.push(c.id);
        }
    }

    let (survivors, profiles): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
    let (assignment, kmeans_iterations) = kmeans_two(&profiles, KMEANS_MAX_ITERATIONS);
    let clusters = split_by_assignment(survivors, &assignment);
    let (candidates, cluster_rest) = pick_top_per_cluster(clusters, params.per_cluster);
    let n_candidates = candidates.len();
    let mmr = mmr_select(candidates, params.active_size, params.lambda, params.measure)?;

    let mut reserve = cluster_rest;
    reserve.extend(mmr.rest);
    Ok(Selection {
        active: mmr.selected,
        reserve,
        pruned,
        stats: SelectionStats {
            similarity_evals: mmr.similarity_evals,
            kmeans_iterations,
            candidates: n_candidates,
        },
    })
}
