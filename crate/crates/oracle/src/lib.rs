//! Brute-force reference computations for testing.
//!
//! Everything here works on plain `u64` bit masks and `(mask, mass)` lists and
//! shares no code with the engine under test. The algorithms are the naive
//! textbook ones: full enumeration of focal-set tuples, whole-lattice sums,
//! and a plain breadth-first search.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;

/// A mass assignment as `(subset mask, mass)` pairs.
pub type Bpa = Vec<(u64, f64)>;

pub fn full(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Unnormalized conjunctive combination by enumerating every tuple of focal
/// sets, one from each input.
pub fn conjunctive(inputs: &[Bpa], n: usize) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    let mut idx = vec![0usize; inputs.len()];
    loop {
        let mut set = full(n);
        let mut mass = 1.0;
        for (k, &i) in idx.iter().enumerate() {
            set &= inputs[k][i].0;
            mass *= inputs[k][i].1;
        }
        *out.entry(set).or_insert(0.0) += mass;
        // odometer increment
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < inputs[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Dempster's rule by enumeration: `None` under total conflict, otherwise the
/// normalized masses and `K`.
pub fn dempster(inputs: &[Bpa], n: usize) -> Option<(BTreeMap<u64, f64>, f64)> {
    let raw = conjunctive(inputs, n);
    let conflict = raw.get(&0).copied().unwrap_or(0.0);
    let surviving: f64 = raw.iter().filter(|(s, _)| **s != 0).map(|(_, m)| m).sum();
    if surviving <= 0.0 {
        return None;
    }
    let norm = raw
        .into_iter()
        .filter(|(s, m)| *s != 0 && *m != 0.0)
        .map(|(s, m)| (s, m / (1.0 - conflict)))
        .collect();
    Some((norm, conflict))
}

pub fn belief(m: &Bpa, a: u64) -> f64 {
    m.iter().filter(|(b, _)| *b != 0 && b & !a == 0).map(|(_, v)| v).sum()
}

pub fn plausibility(m: &Bpa, a: u64) -> f64 {
    m.iter().filter(|(b, _)| b & a != 0).map(|(_, v)| v).sum()
}

pub fn commonality(m: &Bpa, a: u64) -> f64 {
    m.iter().filter(|(b, _)| a & !b == 0).map(|(_, v)| v).sum()
}

/// Commonality recovered from the belief function alone: Möbius inversion
/// `m(A) = Σ_{B⊆A} (-1)^{|A\B|} Bel(B)`, then `q(A) = Σ_{C⊇A} m(C)`.
/// Exponential; meant for frames of at most ~10 propositions.
pub fn commonality_via_mobius(bel: impl Fn(u64) -> f64, n: usize, a: u64) -> f64 {
    let theta = full(n);
    let mass_of = |c: u64| -> f64 {
        let mut total = 0.0;
        let mut b = c;
        loop {
            let sign = if (c & !b).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            total += sign * bel(b);
            if b == 0 {
                break;
            }
            b = (b - 1) & c;
        }
        total
    };
    let mut q = 0.0;
    for c in 0..=theta {
        if c & a == a && c != 0 {
            q += mass_of(c);
        }
    }
    q
}

/// `-Σ log2 q(a)` over every subset of the frame with `q(a) > 0`.
pub fn info_measure(m: &Bpa, n: usize) -> f64 {
    let mut total = 0.0;
    for a in 0..=full(n) {
        let q = commonality(m, a);
        if q > 0.0 {
            total -= q.log2();
        }
    }
    total
}

/// Unweighted shortest-path length by breadth-first search over an
/// adjacency list.
pub fn bfs_distance(adjacency: &[Vec<usize>], from: usize, to: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    dist[from] = 0;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    (dist[to] != usize::MAX).then_some(dist[to])
}

/// Random closed-world BPA with up to `max_focal` distinct nonempty focal
/// sets (Θ included when `with_theta`), masses normalized to one.
pub fn random_bpa<R: Rng>(rng: &mut R, n: usize, max_focal: usize, with_theta: bool) -> Bpa {
    let theta = full(n);
    let k = rng.random_range(1..=max_focal);
    let mut sets: Vec<u64> = Vec::new();
    if with_theta {
        sets.push(theta);
    }
    while sets.len() < k {
        let s = rng.random_range(1..=theta);
        if !sets.contains(&s) {
            sets.push(s);
        }
        if sets.len() as u64 == theta {
            break;
        }
    }
    let weights: Vec<f64> = sets.iter().map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    sets.into_iter().zip(weights).map(|(s, w)| (s, w / total)).collect()
}

pub fn max_abs_diff(a: &BTreeMap<u64, f64>, b: &BTreeMap<u64, f64>) -> f64 {
    let keys: std::collections::BTreeSet<u64> = a.keys().chain(b.keys()).copied().collect();
    keys.iter()
        .map(|k| (a.get(k).unwrap_or(&0.0) - b.get(k).unwrap_or(&0.0)).abs())
        .fold(0.0, f64::max)
}
