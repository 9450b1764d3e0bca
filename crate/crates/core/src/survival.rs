//! Survival losses and evaluation statistics: Cox partial likelihood,
//! discrete-time NLL, concordance index, Kaplan-Meier, log-rank test and
//! median risk stratification.

use std::cmp::Ordering;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Continuous-time survival records with model risk scores.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalTable<T> {
    time: Vec<T>,
    event: Vec<bool>,
    risk: Vec<T>,
}

fn check_times<T: Scalar>(time: &[T]) -> Result<()> {
    if let Some((i, t)) = time.iter().enumerate().find(|(_, t)| !(t.is_finite() && **t >= T::zero())) {
        return Err(Error::invalid("time", format!("row {i}: time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

impl<T: Scalar> SurvivalTable<T> {
    pub fn new(time: Vec<T>, event: Vec<bool>, risk: Vec<T>) -> Result<Self> {
        if time.is_empty() {
            return Err(Error::invalid("survival table", "table has no rows"));
        }
        if event.len() != time.len() {
            return Err(Error::dims("event column", time.len(), event.len()));
        }
        if risk.len() != time.len() {
            return Err(Error::dims("risk column", time.len(), risk.len()));
        }
        check_times(&time)?;
        if let Some(i) = risk.iter().position(|r| !r.is_finite()) {
            return Err(Error::invalid("risk", format!("row {i}: risk must be finite")));
        }
        Ok(Self { time, event, risk })
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn time(&self) -> &[T] {
        &self.time
    }

    pub fn event(&self) -> &[bool] {
        &self.event
    }

    pub fn risk(&self) -> &[T] {
        &self.risk
    }

    pub fn n_events(&self) -> usize {
        self.event.iter().filter(|&&e| e).count()
    }

    /// Times and events of the given rows.
    pub fn cohort(&self, rows: &[usize]) -> Result<Cohort<T>> {
        if let Some(&i) = rows.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid("rows", format!("index {i} out of range {}", self.len())));
        }
        Cohort::new(
            rows.iter().map(|&i| self.time[i]).collect(),
            rows.iter().map(|&i| self.event[i]).collect(),
        )
    }
}

/// Times and event indicators of one group, without risks.
#[derive(Debug, Clone, PartialEq)]
pub struct Cohort<T> {
    pub time: Vec<T>,
    pub event: Vec<bool>,
}

impl<T: Scalar> Cohort<T> {
    pub fn new(time: Vec<T>, event: Vec<bool>) -> Result<Self> {
        if event.len() != time.len() {
            return Err(Error::dims("event column", time.len(), event.len()));
        }
        check_times(&time)?;
        Ok(Self { time, event })
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }
}

fn cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).expect("values are finite")
}

/// Concordance over comparable pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concordance {
    pub n_pairs: u64,
    pub concordant: u64,
    pub risk_ties: u64,
}

impl Concordance {
    pub fn c_index(&self) -> f64 {
        (self.concordant as f64 + 0.5 * self.risk_ties as f64) / self.n_pairs as f64
    }
}

// Fenwick tree over risk ranks.
struct Counts(Vec<u64>);

impl Counts {
    fn new(n: usize) -> Self {
        Counts(vec![0; n + 1])
    }

    fn add(&mut self, rank: usize) {
        let mut i = rank + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks `< rank`.
    fn below(&self, rank: usize) -> u64 {
        let mut i = rank;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Harrell's concordance. A pair `(i, j)` is comparable when `i` has an
/// event and either `t_j > t_i`, or `t_j == t_i` and `j` is censored. It is
/// concordant when `r_i > r_j`; equal risks count one half.
pub fn concordance<T: Scalar>(table: &SurvivalTable<T>) -> Result<Concordance> {
    let n = table.len();
    let (time, event, risk) = (table.time(), table.event(), table.risk());

    let mut by_risk: Vec<usize> = (0..n).collect();
    by_risk.sort_by(|&a, &b| cmp(&risk[a], &risk[b]));
    let mut rank = vec![0usize; n];
    let mut lo = vec![0usize; n];
    let mut hi = vec![0usize; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && risk[by_risk[end + 1]] == risk[by_risk[start]] {
            end += 1;
        }
        for &i in &by_risk[start..=end] {
            rank[i] = start;
            lo[i] = start;
            hi[i] = end + 1;
        }
        start = end + 1;
    }

    let mut by_time: Vec<usize> = (0..n).collect();
    by_time.sort_by(|&a, &b| cmp(&time[b], &time[a]));

    let mut later = Counts::new(n);
    let mut n_later = 0u64;
    let mut out = Concordance {
        n_pairs: 0,
        concordant: 0,
        risk_ties: 0,
    };
    let mut g = 0;
    while g < n {
        let mut e = g;
        while e + 1 < n && time[by_time[e + 1]] == time[by_time[g]] {
            e += 1;
        }
        let group = &by_time[g..=e];
        let mut censored: Vec<T> = group.iter().filter(|&&j| !event[j]).map(|&j| risk[j]).collect();
        censored.sort_by(cmp);
        for &i in group.iter().filter(|&&i| event[i]) {
            let below = later.below(lo[i]);
            let tied = later.below(hi[i]) - below;
            out.n_pairs += n_later;
            out.concordant += below;
            out.risk_ties += tied;

            let c_below = censored.partition_point(|r| *r < risk[i]) as u64;
            let c_tied = censored.partition_point(|r| *r <= risk[i]) as u64 - c_below;
            out.n_pairs += censored.len() as u64;
            out.concordant += c_below;
            out.risk_ties += c_tied;
        }
        for &j in group {
            later.add(rank[j]);
        }
        n_later += group.len() as u64;
        g = e + 1;
    }
    if out.n_pairs == 0 {
        return Err(Error::Degenerate("no comparable pairs".into()));
    }
    Ok(out)
}

pub fn concordance_index<T: Scalar>(table: &SurvivalTable<T>) -> Result<f64> {
    Ok(concordance(table)?.c_index())
}

/// Negative mean Cox partial log-likelihood (Breslow ties) and its gradient
/// with respect to the risks.
pub fn cox_loss<T: Scalar>(table: &SurvivalTable<T>) -> Result<(T, Vec<T>)> {
    let n_events = table.n_events();
    if n_events == 0 {
        return Err(Error::Degenerate("Cox loss needs at least one event".into()));
    }
    let n = table.len();
    let (time, event, risk) = (table.time(), table.event(), table.risk());
    let shift = risk.iter().copied().fold(T::neg_infinity(), T::max);
    let w: Vec<T> = risk.iter().map(|&r| (r - shift).exp()).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp(&time[b], &time[a]));

    // log Σ_{t_j >= t_i} e^{r_j} for every row, then Σ over events of 1/denominator
    // for every row's risk set membership.
    let mut log_denom = vec![T::zero(); n];
    let mut acc = T::zero();
    let mut g = 0;
    while g < n {
        let mut e = g;
        while e + 1 < n && time[order[e + 1]] == time[order[g]] {
            e += 1;
        }
        for &j in &order[g..=e] {
            acc += w[j];
        }
        for &j in &order[g..=e] {
            log_denom[j] = acc.ln() + shift;
        }
        g = e + 1;
    }

    let mut loss = T::zero();
    for i in 0..n {
        if event[i] {
            loss -= risk[i] - log_denom[i];
        }
    }
    let ne = T::from_usize_lossy(n_events);

    let mut grad = vec![T::zero(); n];
    let mut inv_sum = T::zero();
    let mut g = n;
    while g > 0 {
        // ascending time, equal times together
        let e = g - 1;
        let mut s = e;
        while s > 0 && time[order[s - 1]] == time[order[e]] {
            s -= 1;
        }
        for &i in &order[s..=e] {
            if event[i] {
                inv_sum += (shift - log_denom[i]).exp();
            }
        }
        for &k in &order[s..=e] {
            let delta = if event[k] { T::one() } else { T::zero() };
            grad[k] = -(delta - w[k] * inv_sum) / ne;
        }
        g = s;
    }
    Ok((loss / ne, grad))
}

/// Discrete-time records: bin index `y ∈ {0..T}` (1-based event bins),
/// event flag and per-bin hazards `h_{n,1..T}` stored in columns `0..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteTable<T> {
    bins: Vec<usize>,
    event: Vec<bool>,
    hazards: Array2<T>,
}

impl<T: Scalar> DiscreteTable<T> {
    pub fn new(bins: Vec<usize>, event: Vec<bool>, hazards: Array2<T>) -> Result<Self> {
        let n = hazards.nrows();
        let t_max = hazards.ncols();
        if n == 0 || t_max == 0 {
            return Err(Error::invalid("hazards", "hazard grid must be non-empty"));
        }
        if bins.len() != n {
            return Err(Error::dims("bins", n, bins.len()));
        }
        if event.len() != n {
            return Err(Error::dims("event column", n, event.len()));
        }
        if let Some(((i, j), h)) = hazards
            .indexed_iter()
            .find(|(_, h)| !(**h > T::zero() && **h < T::one()))
        {
            return Err(Error::invalid("hazards", format!("entry ({i}, {j}) = {h} is outside (0, 1)")));
        }
        for i in 0..n {
            let y = bins[i];
            if event[i] && !(1..=t_max).contains(&y) {
                return Err(Error::invalid(
                    "bins",
                    format!("row {i}: event bin {y} outside 1..={t_max}"),
                ));
            }
            if !event[i] && y + 1 > t_max {
                return Err(Error::invalid(
                    "bins",
                    format!("row {i}: censored at bin {y} needs hazard {} beyond the grid of {t_max}", y + 1),
                ));
            }
        }
        Ok(Self { bins, event, hazards })
    }

    pub fn hazards(&self) -> ArrayView2<'_, T> {
        self.hazards.view()
    }
}

/// Mean of `-δ(log S_y + log h_y) - (1-δ) log S_{y+1}` with
/// `S_t = Π_{j<=t} (1 - h_j)` and `S_0 = 1`.
pub fn discrete_nll<T: Scalar>(table: &DiscreteTable<T>) -> Result<T> {
    let n = table.bins.len();
    let log_surv = |i: usize, t: usize| {
        (0..t).fold(T::zero(), |acc, j| acc + (-table.hazards[(i, j)]).ln_1p())
    };
    let mut total = T::zero();
    for i in 0..n {
        let y = table.bins[i];
        total -= if table.event[i] {
            log_surv(i, y) + table.hazards[(i, y - 1)].ln()
        } else {
            log_surv(i, y + 1)
        };
    }
    Ok(total / T::from_usize_lossy(n))
}

/// One step of a Kaplan-Meier curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmPoint<T> {
    pub time: T,
    pub survival: T,
    pub at_risk: usize,
    pub events: usize,
}

/// Product-limit estimate with one point per distinct observed time.
#[derive(Debug, Clone, PartialEq)]
pub struct KmCurve<T> {
    pub points: Vec<KmPoint<T>>,
}

impl<T: Scalar> KmCurve<T> {
    /// `S(t)`, right-continuous; 1 before the first step.
    pub fn survival_at(&self, t: T) -> T {
        let k = self.points.partition_point(|p| p.time <= t);
        if k == 0 {
            T::one()
        } else {
            self.points[k - 1].survival
        }
    }
}

pub fn kaplan_meier<T: Scalar>(times: &[T], events: &[bool]) -> Result<KmCurve<T>> {
    let cohort = Cohort::new(times.to_vec(), events.to_vec())?;
    if cohort.is_empty() {
        return Err(Error::invalid("times", "Kaplan-Meier needs at least one sample"));
    }
    let n = cohort.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp(&times[a], &times[b]));

    let mut points = Vec::new();
    let mut s = T::one();
    let mut at_risk = n;
    let mut g = 0;
    while g < n {
        let t = times[order[g]];
        let mut e = g;
        while e + 1 < n && times[order[e + 1]] == t {
            e += 1;
        }
        let d = order[g..=e].iter().filter(|&&i| events[i]).count();
        if d > 0 {
            s *= T::one() - T::from_usize_lossy(d) / T::from_usize_lossy(at_risk);
        }
        points.push(KmPoint {
            time: t,
            survival: s,
            at_risk,
            events: d,
        });
        at_risk -= e + 1 - g;
        g = e + 1;
    }
    Ok(KmCurve { points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogRank {
    pub chi_square: f64,
    pub p_value: f64,
}

/// Upper tail of the chi-square distribution with one degree of freedom.
pub fn chi2_1_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    libm::erfc((x / 2.0).sqrt())
}

/// Two-group log-rank test.
pub fn logrank_test<T: Scalar>(a: &Cohort<T>, b: &Cohort<T>) -> Result<LogRank> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("groups", "both groups must be non-empty"));
    }
    let mut rows: Vec<(f64, bool, bool)> = Vec::with_capacity(a.len() + b.len());
    rows.extend(a.time.iter().zip(&a.event).map(|(t, &e)| (t.as_f64(), e, true)));
    rows.extend(b.time.iter().zip(&b.event).map(|(t, &e)| (t.as_f64(), e, false)));
    if !rows.iter().any(|r| r.1) {
        return Err(Error::Degenerate("log-rank test needs at least one event".into()));
    }
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));

    let (mut n_a, mut n_b) = (a.len() as f64, b.len() as f64);
    let (mut observed, mut expected, mut variance) = (0.0, 0.0, 0.0);
    let mut g = 0;
    while g < rows.len() {
        let mut e = g;
        while e + 1 < rows.len() && rows[e + 1].0 == rows[g].0 {
            e += 1;
        }
        let group = &rows[g..=e];
        let d_a = group.iter().filter(|r| r.1 && r.2).count() as f64;
        let d = group.iter().filter(|r| r.1).count() as f64;
        let n = n_a + n_b;
        if d > 0.0 {
            observed += d_a;
            expected += d * n_a / n;
            if n > 1.0 {
                variance += d * (n_a / n) * (n_b / n) * (n - d) / (n - 1.0);
            }
        }
        n_a -= group.iter().filter(|r| r.2).count() as f64;
        n_b -= group.iter().filter(|r| !r.2).count() as f64;
        g = e + 1;
    }
    if !(variance > 0.0) {
        return Err(Error::Degenerate("log-rank variance is zero".into()));
    }
    let chi_square = (observed - expected).powi(2) / variance;
    Ok(LogRank {
        chi_square,
        p_value: chi2_1_sf(chi_square),
    })
}

/// Group for risks exactly equal to the median.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MedianTies {
    #[default]
    Low,
    High,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Strata<T> {
    pub median: T,
    pub high: Vec<usize>,
    pub low: Vec<usize>,
}

pub fn risk_stratify<T: Scalar>(risks: &[T]) -> Result<Strata<T>> {
    risk_stratify_with(risks, MedianTies::Low)
}

/// Median split of `risks` into high and low indices, both ascending.
pub fn risk_stratify_with<T: Scalar>(risks: &[T], ties: MedianTies) -> Result<Strata<T>> {
    if risks.len() < 2 {
        return Err(Error::invalid("risks", "stratification needs at least two samples"));
    }
    if risks.iter().any(|r| !r.is_finite()) {
        return Err(Error::invalid("risks", "risks must be finite"));
    }
    let mut sorted = risks.to_vec();
    sorted.sort_by(cmp);
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / T::lit(2.0)
    };
    let (mut high, mut low) = (Vec::new(), Vec::new());
    for (i, &r) in risks.iter().enumerate() {
        let is_high = match r.partial_cmp(&median) {
            Some(Ordering::Greater) => true,
            Some(Ordering::Less) => false,
            _ => ties == MedianTies::High,
        };
        if is_high {
            high.push(i);
        } else {
            low.push(i);
        }
    }
    if high.is_empty() || low.is_empty() {
        return Err(Error::Degenerate(format!(
            "median split leaves an empty group ({} high, {} low)",
            high.len(),
            low.len()
        )));
    }
    Ok(Strata { median, high, low })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn table(t: &[f64], e: &[u8], r: &[f64]) -> SurvivalTable<f64> {
        SurvivalTable::new(t.to_vec(), e.iter().map(|&x| x == 1).collect(), r.to_vec()).unwrap()
    }

    #[test]
    fn cindex_perfect_and_ties() {
        let t = table(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], &[4.0, 3.0, 2.0, 1.0]);
        assert_eq!(concordance_index(&t).unwrap(), 1.0);
        let t = table(&[1.0, 2.0, 3.0, 4.0], &[1, 1, 1, 1], &[0.0; 4]);
        assert_eq!(concordance_index(&t).unwrap(), 0.5);
    }

    #[test]
    fn cindex_mixed_by_hand() {
        // pairs: (0,1) c, (0,2) c, (0,3) d, (2,3) tie-risk, (2,?)...
        let t = table(&[1.0, 3.0, 2.0, 2.0], &[1, 0, 1, 0], &[0.9, 0.1, 0.5, 0.5]);
        // comparable: 0 vs 1,2,3 ; 2 vs 1 (t=3>2), 2 vs 3 (equal time, 3 censored)
        let c = concordance(&t).unwrap();
        assert_eq!(c.n_pairs, 5);
        assert_eq!(c.concordant, 4);
        assert_eq!(c.risk_ties, 1);
        assert_eq!(c.c_index(), 0.9);
    }

    #[test]
    fn cindex_no_pairs() {
        let t = table(&[1.0, 2.0], &[0, 0], &[0.0, 1.0]);
        assert!(concordance_index(&t).is_err());
        // two events at the same time are not comparable
        let t = table(&[2.0, 2.0], &[1, 1], &[0.0, 1.0]);
        assert!(concordance_index(&t).is_err());
    }

    #[test]
    fn cox_small_cases() {
        let (l, g) = cox_loss(&table(&[3.0], &[1], &[0.7])).unwrap();
        assert!(l.abs() < 1e-15);
        assert!(g[0].abs() < 1e-15);
        let (l, _) = cox_loss(&table(&[1.0, 2.0], &[1, 0], &[0.3, 0.3])).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        assert!(cox_loss(&table(&[1.0, 2.0], &[0, 0], &[0.3, 0.3])).is_err());
    }

    #[test]
    fn cox_tied_event_times_share_denominator() {
        let t = table(&[1.0, 1.0, 2.0], &[1, 1, 1], &[0.1, 0.4, -0.2]);
        let (l, _) = cox_loss(&t).unwrap();
        let d0 = (0.1f64.exp() + 0.4f64.exp() + (-0.2f64).exp()).ln();
        let expected = -((0.1 - d0) + (0.4 - d0) + (-0.2 - (-0.2))) / 3.0;
        assert!((l - expected).abs() < 1e-14);
    }

    #[test]
    fn discrete_nll_single_bin() {
        let h = 1.0 - (-1f64).exp();
        let t = DiscreteTable::new(vec![1], vec![true], array![[h]]).unwrap();
        let got = discrete_nll(&t).unwrap();
        assert!((got - (1.0 - h.ln())).abs() < 1e-14);
    }

    #[test]
    fn discrete_nll_censored_small_hazards() {
        let t = DiscreteTable::new(vec![2], vec![false], array![[1e-12, 1e-12, 1e-12]]).unwrap();
        assert!(discrete_nll(&t).unwrap() < 1e-11);
    }

    #[test]
    fn discrete_grid_checks() {
        assert!(DiscreteTable::new(vec![3], vec![false], array![[0.1, 0.1, 0.1]]).is_err());
        assert!(DiscreteTable::new(vec![0], vec![true], array![[0.1, 0.1]]).is_err());
        assert!(DiscreteTable::new(vec![1], vec![true], array![[0.0, 0.1]]).is_err());
        assert!(DiscreteTable::new(vec![0], vec![false], array![[0.1, 0.1]]).is_ok());
    }

    #[test]
    fn km_basic() {
        let c = kaplan_meier(&[1.0, 2.0], &[true, true]).unwrap();
        let s: Vec<f64> = c.points.iter().map(|p| p.survival).collect();
        assert_eq!(s, vec![0.5, 0.0]);
        assert_eq!(c.survival_at(0.5), 1.0);
        let c = kaplan_meier(&[1.0, 2.0, 2.0], &[false, false, false]).unwrap();
        assert!(c.points.iter().all(|p| p.survival == 1.0));
        assert_eq!(c.points[1].at_risk, 2);
    }

    #[test]
    fn logrank_identical_groups() {
        let a = Cohort::new(vec![1.0, 2.0, 2.5, 4.0], vec![true, false, true, true]).unwrap();
        let r = logrank_test(&a, &a.clone()).unwrap();
        assert!(r.chi_square.abs() < 1e-15);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn logrank_two_by_two() {
        // group a dies at 1 and 2, group b censored at 3 and 4
        let a = Cohort::new(vec![1.0, 2.0], vec![true, true]).unwrap();
        let b = Cohort::new(vec![3.0, 4.0], vec![false, false]).unwrap();
        // t=1: n=4, na=2, d=1 -> E=0.5, V=1*0.5*0.5*3/3=0.25
        // t=2: n=3, na=1, d=1 -> E=1/3, V=(1/3)(2/3)=2/9
        let expected = (2.0f64 - 0.5 - 1.0 / 3.0).powi(2) / (0.25 + 2.0 / 9.0);
        let r = logrank_test(&a, &b).unwrap();
        assert!((r.chi_square - expected).abs() < 1e-14);
        let s = logrank_test(&b, &a).unwrap();
        assert!((s.chi_square - r.chi_square).abs() < 1e-14);
    }

    #[test]
    fn chi2_tail() {
        assert_eq!(chi2_1_sf(0.0), 1.0);
        // 3.841458820694124 is the 95% quantile
        assert!((chi2_1_sf(3.841458820694124) - 0.05).abs() < 1e-12);
        let tiny = chi2_1_sf(50.0);
        assert!(tiny > 0.0 && tiny < 1e-11);
    }

    #[test]
    fn stratify_cases() {
        let s = risk_stratify(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.high, vec![2, 3]);
        assert_eq!(s.low, vec![0, 1]);
        let s = risk_stratify(&[4.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(s.high, vec![0, 1]);
        let s = risk_stratify(&[5.0, 1.0, 3.0]).unwrap();
        assert_eq!(s.low, vec![1, 2]);
        let s = risk_stratify_with(&[5.0, 1.0, 3.0], MedianTies::High).unwrap();
        assert_eq!(s.high, vec![0, 2]);
        assert!(risk_stratify(&[2.0, 2.0, 2.0]).is_err());
        assert!(risk_stratify(&[1.0, 2.0, 2.0, 2.0]).is_err());
        assert!(risk_stratify(&[1.0]).is_err());
    }
}
