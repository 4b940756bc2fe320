//! Plug-in (maximum-likelihood) estimates of discrete information quantities.
//!
//! All logarithms are base 2. Distributions are sparse: only observed tuples
//! are stored, and every sum runs over tuples in lexicographic order so that
//! results are bit-identical regardless of how they were tallied.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::table::{Label, PredictionTable, Var};

/// Observed frequency distribution over tuples of discrete variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalDistribution {
    arity: usize,
    sample_count: u64,
    counts: BTreeMap<Vec<Label>, u64>,
}

impl EmpiricalDistribution {
    /// Tallies `tuples`, each of which must have length `arity`.
    pub fn from_tuples<I>(arity: usize, tuples: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<Label>>,
    {
        if arity == 0 {
            return Err(Error::InvalidConfig("distribution arity must be at least 1".into()));
        }
        let mut counts = BTreeMap::new();
        let mut n = 0u64;
        for t in tuples {
            if t.len() != arity {
                return Err(Error::Dimension {
                    expected: arity,
                    got: t.len(),
                });
            }
            *counts.entry(t).or_insert(0) += 1;
            n += 1;
        }
        if n == 0 {
            return Err(Error::Degenerate("no samples".into()));
        }
        Ok(Self {
            arity,
            sample_count: n,
            counts,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, tuple: &[Label]) -> u64 {
        self.counts.get(tuple).copied().unwrap_or(0)
    }

    pub fn probability(&self, tuple: &[Label]) -> f64 {
        self.count(tuple) as f64 / self.sample_count as f64
    }

    /// Observed tuples with their probabilities, in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&[Label], f64)> + '_ {
        let m = self.sample_count as f64;
        self.counts
            .iter()
            .map(move |(t, &c)| (t.as_slice(), c as f64 / m))
    }

    /// Marginal over `positions`, keeping their order.
    pub fn marginal(&self, positions: &[usize]) -> Result<Self> {
        validate_positions(self.arity, &[positions])?;
        if positions.is_empty() {
            return Err(Error::InvalidPositions { arity: self.arity });
        }
        let mut counts = BTreeMap::new();
        for (t, &c) in &self.counts {
            let key: Vec<Label> = positions.iter().map(|&p| t[p]).collect();
            *counts.entry(key).or_insert(0) += c;
        }
        Ok(Self {
            arity: positions.len(),
            sample_count: self.sample_count,
            counts,
        })
    }

    /// Entropy of the marginal over `positions`; 0 for the empty set.
    fn marginal_entropy(&self, positions: &[usize]) -> f64 {
        if positions.is_empty() {
            return 0.0;
        }
        if positions.len() == self.arity && positions.iter().enumerate().all(|(i, &p)| i == p) {
            return entropy(self);
        }
        let mut counts: BTreeMap<Vec<Label>, u64> = BTreeMap::new();
        for (t, &c) in &self.counts {
            let key: Vec<Label> = positions.iter().map(|&p| t[p]).collect();
            *counts.entry(key).or_insert(0) += c;
        }
        plugin_entropy(counts.into_values(), self.sample_count)
    }
}

fn validate_positions(arity: usize, sets: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; arity];
    for set in sets {
        for &p in *set {
            if p >= arity || seen[p] {
                return Err(Error::InvalidPositions { arity });
            }
            seen[p] = true;
        }
    }
    Ok(())
}

/// `−Σ (c/m) log2 (c/m)` over the counts in iteration order.
pub(crate) fn plugin_entropy<I: IntoIterator<Item = u64>>(counts: I, m: u64) -> f64 {
    let m = m as f64;
    let mut h = 0.0;
    for c in counts {
        let p = c as f64 / m;
        h -= p * p.log2();
    }
    h + 0.0
}

/// Joint distribution of the selected table variables.
pub fn estimate_joint(table: &PredictionTable, vars: &[Var]) -> Result<EmpiricalDistribution> {
    let cols = vars
        .iter()
        .map(|&v| table.column(v))
        .collect::<Result<Vec<_>>>()?;
    let m = table.n_instances();
    EmpiricalDistribution::from_tuples(
        vars.len(),
        (0..m).map(|j| cols.iter().map(|c| c[j]).collect()),
    )
}

pub fn entropy(dist: &EmpiricalDistribution) -> f64 {
    plugin_entropy(dist.counts.values().copied(), dist.sample_count)
}

/// `H(T|S) = H(S,T) − H(S)` from a single joint distribution.
pub fn conditional_entropy(
    joint: &EmpiricalDistribution,
    target: &[usize],
    given: &[usize],
) -> Result<f64> {
    validate_positions(joint.arity, &[target, given])?;
    let all: Vec<usize> = given.iter().chain(target).copied().collect();
    Ok(joint.marginal_entropy(&all) - joint.marginal_entropy(given))
}

/// `I(A;B) = H(A) + H(B) − H(A,B)`; exactly symmetric in `a` and `b`.
pub fn mutual_information(
    joint: &EmpiricalDistribution,
    a: &[usize],
    b: &[usize],
) -> Result<f64> {
    validate_positions(joint.arity, &[a, b])?;
    let (first, second) = if a <= b { (a, b) } else { (b, a) };
    let all: Vec<usize> = first.iter().chain(second).copied().collect();
    Ok((joint.marginal_entropy(a) + joint.marginal_entropy(b)) - joint.marginal_entropy(&all))
}

/// `Σ p(s) log2 (p(s) / Π p(s_i))` over all positions of `joint`.
pub fn multi_information(joint: &EmpiricalDistribution) -> f64 {
    if joint.arity == 1 {
        return 0.0;
    }
    let m = joint.sample_count as f64;
    let marginals: Vec<HashMap<Label, u64>> = (0..joint.arity)
        .map(|i| {
            let mut h = HashMap::new();
            for (t, &c) in &joint.counts {
                *h.entry(t[i]).or_insert(0) += c;
            }
            h
        })
        .collect();
    let mut total = 0.0;
    for (t, &c) in &joint.counts {
        let p = c as f64 / m;
        let log_prod: f64 = t
            .iter()
            .zip(&marginals)
            .map(|(v, marg)| (marg[v] as f64 / m).log2())
            .sum();
        total += p * (p.log2() - log_prod);
    }
    total
}

/// Expectation over the `given` values of the multi-information of the
/// `target` variables under `p(·|s)`.
pub fn conditional_multi_information(
    joint: &EmpiricalDistribution,
    target: &[usize],
    given: &[usize],
) -> Result<f64> {
    validate_positions(joint.arity, &[target, given])?;
    if target.is_empty() {
        return Err(Error::InvalidPositions { arity: joint.arity });
    }
    if target.len() == 1 {
        return Ok(0.0);
    }
    let m = joint.sample_count as f64;
    let key_of = |t: &[Label], extra: Option<usize>| -> Vec<Label> {
        let mut k: Vec<Label> = given.iter().map(|&p| t[p]).collect();
        if let Some(p) = extra {
            k.push(t[p]);
        }
        k
    };
    let mut given_counts: HashMap<Vec<Label>, u64> = HashMap::new();
    let mut pair_counts: Vec<HashMap<Vec<Label>, u64>> = vec![HashMap::new(); target.len()];
    let mut joint_counts: BTreeMap<Vec<Label>, u64> = BTreeMap::new();
    for (t, &c) in &joint.counts {
        *given_counts.entry(key_of(t, None)).or_insert(0) += c;
        for (slot, &p) in pair_counts.iter_mut().zip(target) {
            *slot.entry(key_of(t, Some(p))).or_insert(0) += c;
        }
        let mut k = key_of(t, None);
        k.extend(target.iter().map(|&p| t[p]));
        *joint_counts.entry(k).or_insert(0) += c;
    }
    let l_minus_1 = (target.len() - 1) as f64;
    let g = given.len();
    let mut total = 0.0;
    for (k, &c) in &joint_counts {
        let p = c as f64 / m;
        let ps = given_counts[&k[..g]] as f64 / m;
        let mut log_pairs = 0.0;
        for (i, slot) in pair_counts.iter().enumerate() {
            let mut pk = k[..g].to_vec();
            pk.push(k[g + i]);
            log_pairs += (slot[&pk] as f64 / m).log2();
        }
        total += p * (p.log2() + l_minus_1 * ps.log2() - log_pairs);
    }
    Ok(total)
}

/// Counts of distinct tuples across `cols`, in lexicographic tuple order.
///
/// Every label must be `< radix`. Uses a dense histogram when the tuple
/// space is small, sorted packed keys when it fits in 64 bits, and sorted
/// label vectors otherwise.
pub(crate) fn tuple_counts(cols: &[&[Label]], radix: u32, m: usize) -> Vec<u64> {
    const DENSE_LIMIT: u64 = 1 << 16;
    if cols.is_empty() {
        return vec![m as u64];
    }
    let r = radix.max(1) as u64;
    let space = cols
        .iter()
        .try_fold(1u64, |acc, _| acc.checked_mul(r));
    let pack = |j: usize| cols.iter().fold(0u64, |k, c| k * r + c[j] as u64);
    match space {
        Some(s) if s <= DENSE_LIMIT.max(2 * m as u64) && s <= 1 << 24 => {
            let mut hist = vec![0u64; s as usize];
            for j in 0..m {
                hist[pack(j) as usize] += 1;
            }
            hist.into_iter().filter(|&c| c > 0).collect()
        }
        Some(_) => {
            let mut keys: Vec<u64> = (0..m).map(pack).collect();
            keys.sort_unstable();
            run_lengths(&keys)
        }
        None => {
            let mut keys: Vec<Vec<Label>> = (0..m).map(|j| cols.iter().map(|c| c[j]).collect()).collect();
            keys.sort_unstable();
            run_lengths(&keys)
        }
    }
}

fn run_lengths<T: PartialEq>(sorted: &[T]) -> Vec<u64> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        out.push((j - i) as u64);
        i = j;
    }
    out
}

/// Joint entropy of raw label columns of equal length.
pub(crate) fn columns_entropy(cols: &[&[Label]], radix: u32, m: usize) -> f64 {
    if cols.is_empty() {
        return 0.0;
    }
    plugin_entropy(tuple_counts(cols, radix, m), m as u64)
}

/// Joint entropy `H(vars)` straight from the table columns.
pub fn joint_entropy(table: &PredictionTable, vars: &[Var]) -> Result<f64> {
    let cols = vars
        .iter()
        .map(|&v| table.column(v))
        .collect::<Result<Vec<_>>>()?;
    Ok(columns_entropy(&cols, table.ymax(), table.n_instances()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_table(n: usize, m: usize, ymax: u32, seed: u64) -> PredictionTable {
        let mut r = SplitMix64::new(seed);
        let truth: Vec<Label> = (0..m).map(|_| r.below(ymax as u64) as Label).collect();
        let models = (0..n)
            .map(|_| {
                truth
                    .iter()
                    .map(|&y| {
                        if r.bernoulli(0.6) {
                            y
                        } else {
                            r.below(ymax as u64) as Label
                        }
                    })
                    .collect()
            })
            .collect();
        PredictionTable::new(models, truth, None, ymax).unwrap()
    }

    fn dist(arity: usize, tuples: &[&[Label]]) -> EmpiricalDistribution {
        EmpiricalDistribution::from_tuples(arity, tuples.iter().map(|t| t.to_vec())).unwrap()
    }

    #[test]
    fn joint_of_truth() {
        let t = PredictionTable::new(vec![vec![0, 1, 0, 1]], vec![0, 0, 1, 1], None, 2).unwrap();
        let d = estimate_joint(&t, &[Var::Truth]).unwrap();
        assert_eq!(d.support_len(), 2);
        assert_eq!(d.probability(&[0]), 0.5);
        assert_eq!(d.probability(&[1]), 0.5);
    }

    #[test]
    fn identity_model_is_diagonal() {
        let y = vec![0, 2, 1, 1, 2, 0, 0];
        let t = PredictionTable::new(vec![y.clone()], y, None, 3).unwrap();
        let d = estimate_joint(&t, &[Var::Model(0), Var::Truth]).unwrap();
        assert!(d.iter().all(|(tuple, _)| tuple[0] == tuple[1]));
    }

    #[test]
    fn joint_matches_independent_tally() {
        let t = random_table(3, 50, 3, 11);
        let d = estimate_joint(&t, &[Var::Model(0), Var::Model(1), Var::Model(2), Var::Truth]).unwrap();
        let mut tally: HashMap<(Label, Label, Label, Label), usize> = HashMap::new();
        for j in 0..50 {
            *tally
                .entry((t.model(0)[j], t.model(1)[j], t.model(2)[j], t.truth()[j]))
                .or_default() += 1;
        }
        assert_eq!(tally.len(), d.support_len());
        for ((a, b, c, y), n) in tally {
            assert_eq!(d.probability(&[a, b, c, y]), n as f64 / 50.0);
        }
        let s: f64 = d.iter().map(|(_, p)| p).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_selectors() {
        let t = random_table(2, 10, 2, 1);
        assert_eq!(
            estimate_joint(&t, &[Var::Combined]).unwrap_err(),
            Error::MissingCombined
        );
        assert!(estimate_joint(&t, &[Var::Model(5)]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&dist(1, &[&[0], &[1]])), 1.0);
        assert_eq!(entropy(&dist(1, &[&[3], &[3], &[3]])), 0.0);
        let d = dist(1, &[&[0], &[1], &[1], &[1]]);
        // -(0.25 log2 0.25 + 0.75 log2 0.75)
        assert!((entropy(&d) - 0.811_278_124_459_132_9).abs() < 1e-15);
    }

    /// Direct double sum `−Σ p(s,t) log2 p(t|s)`.
    fn conditional_entropy_oracle(d: &EmpiricalDistribution, target: &[usize], given: &[usize]) -> f64 {
        let mut ps: HashMap<Vec<Label>, f64> = HashMap::new();
        let mut pst: HashMap<(Vec<Label>, Vec<Label>), f64> = HashMap::new();
        for (t, p) in d.iter() {
            let s: Vec<Label> = given.iter().map(|&i| t[i]).collect();
            let tt: Vec<Label> = target.iter().map(|&i| t[i]).collect();
            *ps.entry(s.clone()).or_default() += p;
            *pst.entry((s, tt)).or_default() += p;
        }
        -pst.iter().map(|((s, _), &p)| p * (p / ps[s]).log2()).sum::<f64>()
    }

    #[test]
    fn conditional_entropy_examples() {
        let t = random_table(2, 200, 3, 5);
        let dup = estimate_joint(&t, &[Var::Truth, Var::Truth]).unwrap();
        assert!(conditional_entropy(&dup, &[1], &[0]).unwrap().abs() < 1e-15);

        // a ⟂ b by construction: every pair appears exactly once.
        let tuples: Vec<Vec<Label>> = (0..3).flat_map(|a| (0..4).map(move |b| vec![a, b])).collect();
        let ind = EmpiricalDistribution::from_tuples(2, tuples).unwrap();
        let hb = entropy(&ind.marginal(&[1]).unwrap());
        assert!((conditional_entropy(&ind, &[1], &[0]).unwrap() - hb).abs() < 1e-12);

        let d = estimate_joint(&t, &[Var::Model(0), Var::Model(1), Var::Truth]).unwrap();
        for (target, given) in [(vec![2], vec![0, 1]), (vec![0, 2], vec![1]), (vec![1], vec![])] {
            let got = conditional_entropy(&d, &target, &given).unwrap();
            let want = conditional_entropy_oracle(&d, &target, &given);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(conditional_entropy(&d, &[0], &[0]).is_err());
        assert!(conditional_entropy(&d, &[3], &[0]).is_err());
    }

    #[test]
    fn mutual_information_examples() {
        let t = random_table(3, 300, 3, 8);
        let xx = estimate_joint(&t, &[Var::Truth, Var::Truth]).unwrap();
        let hx = entropy(&xx.marginal(&[0]).unwrap());
        assert!((mutual_information(&xx, &[0], &[1]).unwrap() - hx).abs() < 1e-12);

        let tuples: Vec<Vec<Label>> = (0..2).flat_map(|a| (0..3).map(move |b| vec![a, b])).collect();
        let ind = EmpiricalDistribution::from_tuples(2, tuples).unwrap();
        assert!(mutual_information(&ind, &[0], &[1]).unwrap().abs() < 1e-12);

        // KL-form oracle Σ p(a,b) log2 p(a,b)/(p(a)p(b)).
        let d = estimate_joint(&t, &[Var::Model(0), Var::Model(1), Var::Truth]).unwrap();
        let (a, b) = (vec![0usize, 1], vec![2usize]);
        let mut pa: HashMap<Vec<Label>, f64> = HashMap::new();
        let mut pb: HashMap<Vec<Label>, f64> = HashMap::new();
        for (tu, p) in d.iter() {
            *pa.entry(a.iter().map(|&i| tu[i]).collect()).or_default() += p;
            *pb.entry(b.iter().map(|&i| tu[i]).collect()).or_default() += p;
        }
        let oracle: f64 = d
            .iter()
            .map(|(tu, p)| {
                let ka: Vec<Label> = a.iter().map(|&i| tu[i]).collect();
                let kb: Vec<Label> = b.iter().map(|&i| tu[i]).collect();
                p * (p / (pa[&ka] * pb[&kb])).log2()
            })
            .sum();
        let got = mutual_information(&d, &a, &b).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert_eq!(got, mutual_information(&d, &b, &a).unwrap());
        assert!(mutual_information(&d, &[0], &[0, 1]).is_err());
    }

    #[test]
    fn multi_information_examples() {
        assert_eq!(multi_information(&dist(1, &[&[0], &[1], &[1]])), 0.0);
        let coin = dist(2, &[&[0, 0], &[1, 1]]);
        assert!((multi_information(&coin) - 1.0).abs() < 1e-15);

        let t = random_table(3, 400, 3, 21);
        let d = estimate_joint(&t, &[Var::Model(0), Var::Model(1), Var::Model(2)]).unwrap();
        let chain = mutual_information(&d, &[1], &[0]).unwrap() + mutual_information(&d, &[2], &[0, 1]).unwrap();
        assert!((multi_information(&d) - chain).abs() < 1e-12);
    }

    /// Per-conditioning-value multi-information averaged by `p(s)`.
    fn conditional_multi_oracle(d: &EmpiricalDistribution, target: &[usize], given: &[usize]) -> f64 {
        let mut groups: BTreeMap<Vec<Label>, Vec<Vec<Label>>> = BTreeMap::new();
        for (t, _) in d.iter() {
            let s: Vec<Label> = given.iter().map(|&i| t[i]).collect();
            let tt: Vec<Label> = target.iter().map(|&i| t[i]).collect();
            let c = d.count(t) as usize;
            groups.entry(s).or_default().extend(std::iter::repeat_n(tt, c));
        }
        let m = d.sample_count() as f64;
        groups
            .into_values()
            .map(|rows| {
                let w = rows.len() as f64 / m;
                let sub = EmpiricalDistribution::from_tuples(target.len(), rows).unwrap();
                w * multi_information(&sub)
            })
            .sum()
    }

    #[test]
    fn conditional_multi_information_examples() {
        let t = random_table(3, 300, 2, 33);
        let d = estimate_joint(&t, &[Var::Model(0), Var::Model(1), Var::Model(2), Var::Truth]).unwrap();
        assert_eq!(conditional_multi_information(&d, &[0], &[3]).unwrap(), 0.0);

        // Within each value of s, (a, b) ranges over a full product grid.
        let mut tuples = Vec::new();
        for s in 0..2 {
            for a in 0..2 {
                for b in 0..3 {
                    tuples.push(vec![a, b, s]);
                }
            }
        }
        let ind = EmpiricalDistribution::from_tuples(3, tuples).unwrap();
        assert!(conditional_multi_information(&ind, &[0, 1], &[2]).unwrap().abs() < 1e-12);

        for (target, given) in [(vec![0, 1, 2], vec![3]), (vec![0, 1], vec![2, 3]), (vec![0, 2], vec![])] {
            let got = conditional_multi_information(&d, &target, &given).unwrap();
            let want = conditional_multi_oracle(&d, &target, &given);
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!(conditional_multi_information(&d, &[0, 1], &[1]).is_err());
    }

    #[test]
    fn column_path_is_bit_identical_to_distribution_path() {
        for (ymax, n) in [(2u32, 5usize), (4, 3), (3, 6)] {
            let t = random_table(n, 257, ymax, 99 + n as u64);
            let mut vars: Vec<Var> = (0..n).map(Var::Model).collect();
            vars.push(Var::Truth);
            let d = estimate_joint(&t, &vars).unwrap();
            assert_eq!(entropy(&d), joint_entropy(&t, &vars).unwrap());
        }
    }

    #[test]
    fn tuple_counts_all_routes_agree() {
        let t = random_table(4, 300, 3, 4);
        let cols: Vec<&[Label]> = t.models().iter().map(Vec::as_slice).collect();
        let dense = tuple_counts(&cols, 3, 300);
        // a radix so large that the tuple space overflows the dense and packed routes
        let wide = tuple_counts(&cols, u32::MAX, 300);
        let packed = tuple_counts(&cols[..2], 1 << 20, 300);
        assert_eq!(dense, wide);
        assert_eq!(packed, tuple_counts(&cols[..2], 3, 300));
    }
}
