//! Partitioning around medoids on grid cells with Manhattan distance.

use crate::archive::GridCell;

/// Sum over points of the distance to the nearest medoid.
pub fn clustering_cost(points: &[GridCell], medoids: &[usize]) -> usize {
    points
        .iter()
        .map(|p| medoids.iter().map(|&m| p.manhattan(points[m])).min().unwrap_or(0))
        .sum()
}

/// Indices of `k` medoids of `points`: greedy build, then best single swaps,
/// with paired swaps once single ones stop helping, until nothing improves.
/// Returns every index when `points.len() <= k`.
/// Ties resolve to the lowest index, so the result depends only on input order.
pub fn kmedoids(points: &[GridCell], k: usize) -> Vec<usize> {
    let n = points.len();
    if n <= k {
        return (0..n).collect();
    }
    let dist: Vec<Vec<usize>> = points.iter().map(|a| points.iter().map(|b| a.manhattan(*b)).collect()).collect();
    // nearest[i] = distance from point i to its closest medoid so far
    let mut nearest = vec![usize::MAX; n];
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    while medoids.len() < k {
        let mut best: Option<(usize, usize)> = None;
        for c in (0..n).filter(|c| !medoids.contains(c)) {
            let cost: usize = (0..n).map(|i| nearest[i].min(dist[i][c])).sum();
            if best.is_none_or(|(bc, _)| cost < bc) {
                best = Some((cost, c));
            }
        }
        let (_, c) = best.expect("n > k");
        medoids.push(c);
        for i in 0..n {
            nearest[i] = nearest[i].min(dist[i][c]);
        }
    }

    let cost_of = |set: &[usize]| -> usize { (0..n).map(|i| set.iter().map(|&m| dist[i][m]).min().unwrap_or(0)).sum() };
    let mut current = cost_of(&medoids);
    loop {
        if let Some((cost, trial)) = best_swap(&medoids, n, 1, &cost_of).filter(|(c, _)| *c < current) {
            (current, medoids) = (cost, trial);
            continue;
        }
        // single swaps are exhausted; a paired swap can leave that local optimum
        match best_swap(&medoids, n, 2, &cost_of).filter(|(c, _)| *c < current) {
            Some((cost, trial)) => (current, medoids) = (cost, trial),
            None => return medoids,
        }
    }
}

/// Cheapest set reachable by replacing `width` (1 or 2) medoids with
/// non-medoids. Ties keep the first candidate in slot-then-index order.
fn best_swap(medoids: &[usize], n: usize, width: usize, cost_of: &dyn Fn(&[usize]) -> usize) -> Option<(usize, Vec<usize>)> {
    let k = medoids.len();
    let outside: Vec<usize> = (0..n).filter(|o| !medoids.contains(o)).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut consider = |trial: Vec<usize>| {
        let cost = cost_of(&trial);
        if best.as_ref().is_none_or(|(bc, _)| cost < *bc) {
            best = Some((cost, trial));
        }
    };
    if width == 1 {
        for slot in 0..k {
            for &o in &outside {
                let mut trial = medoids.to_vec();
                trial[slot] = o;
                consider(trial);
            }
        }
    } else {
        for s1 in 0..k {
            for s2 in s1 + 1..k {
                for (a, &o1) in outside.iter().enumerate() {
                    for &o2 in &outside[a + 1..] {
                        let mut trial = medoids.to_vec();
                        trial[s1] = o1;
                        trial[s2] = o2;
                        consider(trial);
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(v: &[(usize, usize)]) -> Vec<GridCell> {
        v.iter().map(|&(c, r)| GridCell::new(c, r)).collect()
    }

    #[test]
    fn fewer_points_than_clusters() {
        assert_eq!(kmedoids(&cells(&[(0, 0), (3, 3), (5, 1)]), 4), vec![0, 1, 2]);
    }

    #[test]
    fn one_medoid_per_tight_cluster() {
        let pts = cells(&[(0, 0), (0, 1), (1, 0), (1, 1), (7, 7), (7, 8), (8, 7), (8, 8)]);
        let mut m = kmedoids(&pts, 2);
        m.sort_unstable();
        assert!(m[0] < 4 && m[1] >= 4);
    }

    fn exhaustive_optimum(points: &[GridCell], k: usize) -> usize {
        let n = points.len();
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| {
                points
                    .iter()
                    .map(|p| (0..n).filter(|i| mask >> i & 1 == 1).map(|i| p.manhattan(points[i])).min().unwrap())
                    .sum()
            })
            .min()
            .unwrap()
    }

    #[test]
    fn four_pairs_reach_the_exhaustive_optimum() {
        let pts = cells(&[(0, 0), (0, 1), (8, 8), (8, 7), (4, 0), (4, 1), (0, 8), (1, 8)]);
        let optimum = exhaustive_optimum(&pts, 4);
        // one medoid per pair, each partner one step away
        assert_eq!(optimum, 4);
        let m = kmedoids(&pts, 4);
        assert_eq!(m.len(), 4);
        assert_eq!(clustering_cost(&pts, &m), optimum);
    }
}
