//! Set partitions of the cycle positions `{0, .., k-1}` and their quotient
//! multigraphs.

use std::sync::OnceLock;

/// Largest cycle length with a precomputed partition table (Bell(8) = 4140).
pub const MAX_K: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionDescriptor {
    pub k: usize,
    pub blocks: Vec<Vec<usize>>,
    /// `block_of[m]` is the block holding position `m`.
    pub block_of: Vec<usize>,
    /// `mu(0, pi) = prod_B (-1)^{|B|-1} (|B|-1)!` on the partition lattice.
    pub moebius_weight: i64,
    /// Edges `{block(m), block(m+1 mod k)}` for `m = 0..k`, loops included.
    pub quotient: Vec<(usize, usize)>,
}

impl PartitionDescriptor {
    fn from_growth_string(rgs: &[usize]) -> Self {
        let k = rgs.len();
        let nblocks = rgs.iter().max().map_or(0, |&m| m + 1);
        let mut blocks = vec![Vec::new(); nblocks];
        for (pos, &b) in rgs.iter().enumerate() {
            blocks[b].push(pos);
        }
        let moebius_weight = blocks
            .iter()
            .map(|b| {
                let size = b.len() as i64;
                let fact: i64 = (1..size).product();
                if size % 2 == 1 { fact } else { -fact }
            })
            .product();
        let quotient = (0..k).map(|m| (rgs[m], rgs[(m + 1) % k])).collect();
        Self { k, blocks, block_of: rgs.to_vec(), moebius_weight, quotient }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }
}

/// All set partitions of `{0, .., k-1}` via restricted growth strings, in
/// lexicographic order of the string.
pub fn set_partitions(k: usize) -> Vec<PartitionDescriptor> {
    if k == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; k];
    loop {
        out.push(PartitionDescriptor::from_growth_string(&rgs));
        // advance: find the rightmost position that can grow
        let mut pos = k - 1;
        loop {
            if pos == 0 {
                return out;
            }
            let bound = rgs[..pos].iter().max().copied().unwrap_or(0) + 1;
            if rgs[pos] < bound {
                rgs[pos] += 1;
                for r in rgs.iter_mut().skip(pos + 1) {
                    *r = 0;
                }
                break;
            }
            pos -= 1;
        }
    }
}

/// Shared, lazily built partition table for `1 <= k <= MAX_K`.
pub fn partition_table(k: usize) -> &'static [PartitionDescriptor] {
    static TABLES: [OnceLock<Vec<PartitionDescriptor>>; MAX_K + 1] =
        [const { OnceLock::new() }; MAX_K + 1];
    assert!((1..=MAX_K).contains(&k), "k = {k} outside 1..={MAX_K}");
    TABLES[k].get_or_init(|| set_partitions(k))
}

/// Partitions whose quotient multigraphs coincide after a rotation or
/// reflection of the cycle positions, merged into one contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientClass {
    pub num_blocks: usize,
    /// Sum of the Möbius weights of the member partitions.
    pub weight: i64,
    /// Distinct block pairs `(a, b)` with `a <= b` and their edge multiplicity.
    pub edges: Vec<((usize, usize), u32)>,
}

/// Restricted growth string of `labels` (blocks renumbered by first use).
fn relabel(labels: impl Iterator<Item = usize>) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; MAX_K + 1];
    let mut next = 0;
    labels
        .map(|b| {
            *map[b].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        })
        .collect()
}

/// Lexicographically smallest growth string over the `2k` symmetries of
/// the cycle.
fn dihedral_canonical(rgs: &[usize]) -> Vec<usize> {
    let k = rgs.len();
    let mut best = rgs.to_vec();
    for r in 0..k {
        let rot = relabel((0..k).map(|m| rgs[(r + m) % k]));
        let refl = relabel((0..k).map(|m| rgs[(r + k - m) % k]));
        best = best.min(rot).min(refl);
    }
    best
}

fn class_of(p: &PartitionDescriptor) -> QuotientClass {
    let mut edges: Vec<((usize, usize), u32)> = Vec::new();
    for &(a, b) in &p.quotient {
        let key = (a.min(b), a.max(b));
        match edges.iter_mut().find(|(e, _)| *e == key) {
            Some((_, m)) => *m += 1,
            None => edges.push((key, 1)),
        }
    }
    edges.sort_unstable();
    QuotientClass { num_blocks: p.num_blocks(), weight: 0, edges }
}

/// Quotient classes for `1 <= k <= MAX_K`; classes whose weights cancel
/// are dropped.
pub fn quotient_classes(k: usize) -> &'static [QuotientClass] {
    static TABLES: [OnceLock<Vec<QuotientClass>>; MAX_K + 1] =
        [const { OnceLock::new() }; MAX_K + 1];
    assert!((1..=MAX_K).contains(&k), "k = {k} outside 1..={MAX_K}");
    TABLES[k].get_or_init(|| {
        let mut classes: Vec<(Vec<usize>, QuotientClass)> = Vec::new();
        for p in partition_table(k) {
            let canon = dihedral_canonical(&p.block_of);
            match classes.iter_mut().find(|(c, _)| *c == canon) {
                Some((_, class)) => class.weight += p.moebius_weight,
                None => {
                    let rep = PartitionDescriptor::from_growth_string(&canon);
                    let mut class = class_of(&rep);
                    class.weight = p.moebius_weight;
                    classes.push((canon, class));
                }
            }
        }
        classes.into_iter().map(|(_, c)| c).filter(|c| c.weight != 0).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let bell = [1, 2, 5, 15, 52, 203, 877, 4140];
        for (k, &b) in (1..=8).zip(&bell) {
            assert_eq!(set_partitions(k).len(), b, "k = {k}");
        }
    }

    #[test]
    fn moebius_weights_sum_to_zero() {
        // sum over the lattice of mu(0, pi) is 0 for k >= 2
        for k in 2..=7 {
            let s: i64 = partition_table(k).iter().map(|p| p.moebius_weight).sum();
            assert_eq!(s, 0);
        }
        let top = set_partitions(4).into_iter().find(|p| p.num_blocks() == 1).unwrap();
        assert_eq!(top.moebius_weight, -6);
    }

    #[test]
    fn classes_preserve_total_weight() {
        for k in 1..=8 {
            let total: i64 = partition_table(k).iter().map(|p| p.moebius_weight).sum();
            let merged: i64 = quotient_classes(k).iter().map(|c| c.weight).sum();
            assert_eq!(total, merged);
            assert!(quotient_classes(k).len() <= partition_table(k).len());
        }
        // the k-cycle itself is one class of weight 1
        let finest: Vec<_> = quotient_classes(5).iter().filter(|c| c.num_blocks == 5).collect();
        assert_eq!(finest.len(), 1);
        assert_eq!(finest[0].weight, 1);
    }

    #[test]
    fn quotient_of_pair_partition() {
        let parts = set_partitions(2);
        assert_eq!(parts[0].quotient, vec![(0, 0), (0, 0)]);
        assert_eq!(parts[1].quotient, vec![(0, 1), (1, 0)]);
        assert_eq!(parts[1].moebius_weight, 1);
        assert_eq!(parts[0].moebius_weight, -1);
    }
}
