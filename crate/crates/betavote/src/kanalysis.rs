//! Partition of the weight axis `k ∈ [1, ∞)` into per-candidate winning
//! intervals.
//!
//! Each candidate's beta score is an affine function of `k`, so the winners
//! at a given weight are the lines attaining the upper envelope there. The
//! envelope is computed exactly with a slope-sorted stack sweep; a second,
//! independent route ([`winning_interval`]) derives each candidate's interval
//! from pairwise score inequalities and the neighbor bounds among potential
//! winners, letting tests cross-check the two.

use serde::Serialize;

use crate::ballots::Election;
use crate::rational::Rational;
use crate::tally::{score_lines, ScoreLine};
use crate::Error;

/// One interval of weights. `hi == None` means the interval extends to +∞
/// (and is then always open on that side). Degenerate point intervals are
/// closed on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KInterval {
    lo: Rational,
    hi: Option<Rational>,
    lo_closed: bool,
    hi_closed: bool,
}

impl KInterval {
    /// `[lo, hi]`, both ends closed. Panics if `hi < lo`; intervals are
    /// always built from already-ordered envelope data.
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order");
        KInterval {
            lo,
            hi: Some(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `[lo, ∞)`.
    pub fn ray(lo: Rational) -> Self {
        KInterval {
            lo,
            hi: None,
            lo_closed: true,
            hi_closed: false,
        }
    }

    /// The single weight `{k}`.
    pub fn point(k: Rational) -> Self {
        KInterval::closed(k.clone(), k)
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    /// `None` encodes +∞.
    pub fn hi(&self) -> Option<&Rational> {
        self.hi.as_ref()
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_point(&self) -> bool {
        self.hi.as_ref() == Some(&self.lo)
    }

    pub fn contains(&self, k: &Rational) -> bool {
        let above = if self.lo_closed {
            *k >= self.lo
        } else {
            *k > self.lo
        };
        let below = match &self.hi {
            None => true,
            Some(hi) => {
                if self.hi_closed {
                    k <= hi
                } else {
                    k < hi
                }
            }
        };
        above && below
    }

    /// True if the two intervals overlap or share a closed endpoint, i.e.
    /// their union is still a single interval.
    fn merges_with(&self, next: &KInterval) -> bool {
        // Callers keep intervals sorted by lo, so only self.hi vs next.lo
        // can separate them.
        match &self.hi {
            None => true,
            Some(hi) => match hi.cmp(&next.lo) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Equal => self.hi_closed || next.lo_closed,
                std::cmp::Ordering::Less => false,
            },
        }
    }
}

impl std::fmt::Display for KInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let open = if self.lo_closed { '[' } else { '(' };
        match &self.hi {
            None => write!(f, "{}{}, inf)", open, self.lo),
            Some(hi) => {
                let close = if self.hi_closed { ']' } else { ')' };
                write!(f, "{}{}, {}{}", open, self.lo, hi, close)
            }
        }
    }
}

/// A normalized union of disjoint intervals, sorted by lower endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KIntervalSet {
    intervals: Vec<KInterval>,
}

impl KIntervalSet {
    pub fn empty() -> Self {
        KIntervalSet::default()
    }

    pub fn of(interval: KInterval) -> Self {
        KIntervalSet {
            intervals: vec![interval],
        }
    }

    pub fn from_intervals(intervals: impl IntoIterator<Item = KInterval>) -> Self {
        let mut set = KIntervalSet::empty();
        for interval in intervals {
            set.insert(interval);
        }
        set
    }

    pub fn insert(&mut self, interval: KInterval) {
        self.intervals.push(interval);
        self.intervals
            .sort_by(|x, y| x.lo.cmp(&y.lo).then(x.hi.is_none().cmp(&y.hi.is_none())));
        let mut merged: Vec<KInterval> = Vec::with_capacity(self.intervals.len());
        for interval in self.intervals.drain(..) {
            match merged.last_mut() {
                Some(last) if last.merges_with(&interval) => {
                    let extends = match (&last.hi, &interval.hi) {
                        (Some(a), Some(b)) => b > a,
                        (Some(_), None) => true,
                        (None, _) => false,
                    };
                    if extends {
                        last.hi = interval.hi;
                        last.hi_closed = interval.hi_closed;
                    }
                }
                _ => merged.push(interval),
            }
        }
        self.intervals = merged;
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> &[KInterval] {
        &self.intervals
    }

    pub fn contains(&self, k: &Rational) -> bool {
        self.intervals.iter().any(|i| i.contains(k))
    }

    /// True iff the set is exactly `[1, ∞)`.
    pub fn covers_domain(&self) -> bool {
        self.intervals.len() == 1
            && self.intervals[0].lo == Rational::one()
            && self.intervals[0].lo_closed
            && self.intervals[0].hi.is_none()
    }
}

/// Candidates sharing one line of the upper envelope: identical approval
/// value and first-choice slope, hence identical winning interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvelopeGroup {
    pub candidates: Vec<usize>,
    pub value_at_one: Rational,
    pub slope: Rational,
    pub interval: KInterval,
}

/// The potential winners of an election: every candidate whose score line
/// touches the upper envelope somewhere on `[1, ∞)`, grouped by line and
/// ordered by ascending slope (first-choice count).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialWinnerReport {
    groups: Vec<EnvelopeGroup>,
}

impl PotentialWinnerReport {
    pub fn groups(&self) -> &[EnvelopeGroup] {
        &self.groups
    }

    /// All potential winners, ordered by ascending slope and then index.
    pub fn members(&self) -> Vec<usize> {
        self.groups
            .iter()
            .flat_map(|g| g.candidates.iter().copied())
            .collect()
    }

    pub fn is_member(&self, candidate: usize) -> bool {
        self.groups
            .iter()
            .any(|g| g.candidates.contains(&candidate))
    }

    /// The candidate's winning weights; empty when not a potential winner.
    pub fn interval_of(&self, candidate: usize) -> KIntervalSet {
        self.groups
            .iter()
            .find(|g| g.candidates.contains(&candidate))
            .map(|g| KIntervalSet::of(g.interval.clone()))
            .unwrap_or_default()
    }

    /// Winners at a specific weight `k ≥ 1`: candidates of every group whose
    /// interval contains it. Empty for `k < 1`, which is outside the domain.
    pub fn winners_at(&self, k: &Rational) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .groups
            .iter()
            .filter(|g| g.interval.contains(k))
            .flat_map(|g| g.candidates.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Successive ratios `(value_i - value_{i+1}) / (slope_{i+1} - slope_i)`
    /// between adjacent groups. Each equals `breakpoint - 1` for the shared
    /// boundary, so the list is non-decreasing.
    pub fn chain_ratios(&self) -> Vec<Rational> {
        self.groups
            .windows(2)
            .map(|pair| {
                (&pair[0].value_at_one - &pair[1].value_at_one)
                    / (&pair[1].slope - &pair[0].slope)
            })
            .collect()
    }

    /// Weights where at least two groups' intervals meet.
    pub fn breakpoints(&self) -> Vec<Rational> {
        self.shared_points(2)
    }

    /// Weights where three or more groups' lines pass through one point of
    /// the envelope — coincident breakpoints, flagged separately because the
    /// winner set collapses several handovers into one weight.
    pub fn coincident_breakpoints(&self) -> Vec<Rational> {
        self.shared_points(3)
    }

    fn shared_points(&self, at_least: usize) -> Vec<Rational> {
        let mut candidates: Vec<Rational> = Vec::new();
        for g in &self.groups {
            candidates.push(g.interval.lo().clone());
            if let Some(hi) = g.interval.hi() {
                candidates.push(hi.clone());
            }
        }
        candidates.sort();
        candidates.dedup();
        candidates
            .into_iter()
            .filter(|k| {
                self.groups
                    .iter()
                    .filter(|g| g.interval.contains(k))
                    .count()
                    >= at_least
            })
            .collect()
    }

    /// Probe weights for tabulating the envelope: 1, every breakpoint, the
    /// midpoint of every finite stretch between them, and one past the last
    /// breakpoint.
    pub fn probe_weights(&self) -> Vec<Rational> {
        let mut probes = vec![Rational::one()];
        let breakpoints = self.breakpoints();
        let mut edges = vec![Rational::one()];
        edges.extend(breakpoints.iter().cloned());
        for pair in edges.windows(2) {
            probes.push((&pair[0] + &pair[1]) / Rational::integer(2));
        }
        probes.extend(breakpoints.iter().cloned());
        if let Some(last) = breakpoints.last() {
            probes.push(last + &Rational::one());
        } else {
            probes.push(Rational::integer(2));
        }
        probes.sort();
        probes.dedup();
        probes
    }
}

/// Where two lines of different slope take equal values.
fn crossing(a: &ScoreLine, b: &ScoreLine) -> Rational {
    Rational::one() + (&a.value_at_one - &b.value_at_one) / (&b.slope - &a.slope)
}

/// Computes the upper envelope of the given score lines over `k ∈ [1, ∞)`.
///
/// Candidates with identical lines are grouped and share an interval.
/// A candidate whose line has the same slope as another's but a smaller
/// value is below it at every weight and is excluded outright.
///
/// Runs in two phases. Phase one is the classic stack sweep in ascending
/// slope order, keeping only lines that own a band of positive length; a
/// line whose band would be empty or degenerate is popped outright, because
/// whether it still ties the finished envelope somewhere cannot be known
/// until the sweep is done. Phase two recovers those boundary ties: a line
/// below the envelope can touch it only at `k = 1` or at a breakpoint (a
/// tangency inside a band would force the line to coincide with the band's
/// own line), so each excluded line is evaluated at exactly those weights
/// and earns a degenerate point interval where it matches the envelope.
pub fn upper_envelope(lines: &[ScoreLine]) -> PotentialWinnerReport {
    assert!(!lines.is_empty(), "envelope needs at least one line");

    // Group identical lines, then keep only the best line per slope.
    let mut sorted: Vec<&ScoreLine> = lines.iter().collect();
    sorted.sort_by(|x, y| {
        (&x.slope, &x.value_at_one, x.candidate).cmp(&(&y.slope, &y.value_at_one, y.candidate))
    });
    struct Group {
        line: ScoreLine,
        candidates: Vec<usize>,
    }
    let mut groups: Vec<Group> = Vec::new();
    for line in sorted {
        match groups.last_mut() {
            Some(g) if g.line.slope == line.slope => {
                if g.line.value_at_one == line.value_at_one {
                    g.candidates.push(line.candidate);
                } else {
                    // Same slope, strictly larger value: replaces the
                    // dominated group entirely.
                    *g = Group {
                        line: line.clone(),
                        candidates: vec![line.candidate],
                    };
                }
            }
            _ => groups.push(Group {
                line: line.clone(),
                candidates: vec![line.candidate],
            }),
        }
    }

    // Phase one: strict bands. `start` is the weight where the stacked line
    // takes over. A steeper line catches the stack top at their crossing x;
    // unless x lies strictly inside the top's band (x > start), the top
    // owns no band and is popped.
    struct Active {
        group: usize,
        start: Rational,
    }
    let mut stack: Vec<Active> = Vec::new();
    for (index, group) in groups.iter().enumerate() {
        let start = loop {
            match stack.last() {
                None => break Rational::one(),
                Some(top) => {
                    let x = crossing(&groups[top.group].line, &group.line);
                    if x > top.start {
                        break x;
                    }
                    stack.pop();
                }
            }
        };
        stack.push(Active {
            group: index,
            start,
        });
    }

    // Band intervals: each stacked line runs to the start of the next; the
    // last runs to infinity. Consecutive bands share their boundary weight,
    // where both lines tie.
    let mut report: Vec<(usize, KInterval)> = Vec::new();
    for i in 0..stack.len() {
        let interval = match stack.get(i + 1) {
            Some(next) => KInterval::closed(stack[i].start.clone(), next.start.clone()),
            None => KInterval::ray(stack[i].start.clone()),
        };
        report.push((stack[i].group, interval));
    }

    // Phase two: boundary ties. Candidate touch weights are the domain edge
    // and the band breakpoints; the envelope value there is the maximum over
    // all lines. Each excluded group ties at most one such weight (two ties
    // would pin it to the envelope over the whole stretch between).
    let mut touch_weights: Vec<Rational> = vec![Rational::one()];
    touch_weights.extend(stack.iter().skip(1).map(|active| active.start.clone()));
    let touches: Vec<(Rational, Rational)> = touch_weights
        .into_iter()
        .map(|x| {
            let envelope_value = groups
                .iter()
                .map(|g| g.line.eval(&x))
                .max()
                .expect("at least one line");
            (x, envelope_value)
        })
        .collect();
    let on_stack: Vec<usize> = stack.iter().map(|active| active.group).collect();
    for (index, group) in groups.iter().enumerate() {
        if on_stack.contains(&index) {
            continue;
        }
        for (x, envelope_value) in &touches {
            if group.line.eval(x) == *envelope_value {
                report.push((index, KInterval::point(x.clone())));
                break;
            }
        }
    }
    report.sort_by_key(|(group, _)| *group);

    PotentialWinnerReport {
        groups: report
            .into_iter()
            .map(|(index, interval)| EnvelopeGroup {
                candidates: groups[index].candidates.clone(),
                value_at_one: groups[index].line.value_at_one.clone(),
                slope: groups[index].line.slope.clone(),
                interval,
            })
            .collect(),
    }
}

/// Potential winners of an election: the upper envelope of its score lines.
/// A candidate with both a strictly smaller first-choice count and a
/// strictly smaller approval count than some rival never appears.
pub fn potential_winners(election: &Election) -> PotentialWinnerReport {
    upper_envelope(&score_lines(election))
}

/// Pairwise feasibility interval of `candidate`: the weights at which it
/// beats every rival, from the score inequalities alone.
fn feasibility(lines: &[ScoreLine], candidate: usize) -> Option<(Rational, Option<Rational>)> {
    let mine = &lines[candidate];
    let mut lo = Rational::one();
    let mut hi: Option<Rational> = None;
    for rival in lines {
        if rival.candidate == candidate {
            continue;
        }
        match rival.slope.cmp(&mine.slope) {
            std::cmp::Ordering::Equal => {
                if rival.value_at_one > mine.value_at_one {
                    return None;
                }
            }
            std::cmp::Ordering::Less => {
                let bound = Rational::one()
                    + (&rival.value_at_one - &mine.value_at_one) / (&mine.slope - &rival.slope);
                lo = lo.max(bound);
            }
            std::cmp::Ordering::Greater => {
                let bound = Rational::one()
                    + (&mine.value_at_one - &rival.value_at_one) / (&rival.slope - &mine.slope);
                hi = Some(match hi {
                    None => bound,
                    Some(existing) => existing.min(bound),
                });
            }
        }
    }
    match &hi {
        Some(h) if *h < lo => None,
        _ => Some((lo, hi)),
    }
}

/// The exact weights at which `candidate` wins, via the closed-form neighbor
/// bounds: membership comes from pairwise feasibility, and the interval ends
/// are the crossings with the adjacent potential winners in slope order (the
/// lowest-slope member starts at 1; the highest-slope member runs to +∞).
///
/// Independent of [`upper_envelope`], and equal to it on every candidate.
pub fn winning_interval(election: &Election, candidate: usize) -> Result<KIntervalSet, Error> {
    let lines = score_lines(election);
    if candidate >= lines.len() {
        return Err(Error::CandidateOutOfRange {
            index: candidate,
            count: lines.len(),
        });
    }
    if feasibility(&lines, candidate).is_none() {
        return Ok(KIntervalSet::empty());
    }

    // Distinct member lines, ascending by slope. Members sharing a slope
    // necessarily share a value (otherwise the lower were infeasible), so
    // slopes are strictly increasing here.
    let mut member_lines: Vec<&ScoreLine> = lines
        .iter()
        .filter(|l| feasibility(&lines, l.candidate).is_some())
        .collect();
    member_lines.sort_by(|x, y| x.slope.cmp(&y.slope).then(x.candidate.cmp(&y.candidate)));
    member_lines.dedup_by(|next, prev| next.slope == prev.slope);

    let position = member_lines
        .iter()
        .position(|l| l.slope == lines[candidate].slope)
        .expect("feasible candidate's slope is always among the member slopes");
    let lo = if position == 0 {
        Rational::one()
    } else {
        crossing(member_lines[position - 1], member_lines[position])
    };
    let interval = if position + 1 == member_lines.len() {
        KInterval::ray(lo)
    } else {
        KInterval::closed(lo, crossing(member_lines[position], member_lines[position + 1]))
    };
    Ok(KIntervalSet::of(interval))
}

/// True iff the successive handover ratios never decrease. Holds for every
/// report built by [`potential_winners`]; exposed so tests can probe
/// synthetic ratio lists too.
pub fn chain_is_nondecreasing(ratios: &[Rational]) -> bool {
    ratios.windows(2).all(|pair| pair[0] <= pair[1])
}

/// Checks the handover-ratio chain of a report.
pub fn check_chain(report: &PotentialWinnerReport) -> bool {
    chain_is_nondecreasing(&report.chain_ratios())
}

/// Any weight strictly above this bound (the voter count) makes every beta
/// winner a plurality winner.
pub fn plurality_regime_bound(election: &Election) -> Rational {
    Rational::from_usize(election.voter_count())
}

/// Any weight in `[1, bound)` with this bound (`1 + 1/n`) makes every beta
/// winner an approval winner.
pub fn approval_regime_bound(election: &Election) -> Rational {
    Rational::one() + Rational::one() / Rational::from_usize(election.voter_count())
}

/// Rendered interval list for one candidate.
#[derive(Debug, Serialize)]
pub struct IntervalReportJson {
    pub candidate: String,
    pub intervals: Vec<IntervalJson>,
}

/// Rendered interval: exact endpoints as strings (`"inf"` for +∞) plus
/// decimal convenience fields. The exact fields are authoritative.
#[derive(Debug, Serialize)]
pub struct IntervalJson {
    pub lo: String,
    pub hi: String,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub lo_decimal: f64,
    pub hi_decimal: Option<f64>,
}

impl From<&KInterval> for IntervalJson {
    fn from(interval: &KInterval) -> Self {
        IntervalJson {
            lo: interval.lo().to_string(),
            hi: interval
                .hi()
                .map(|h| h.to_string())
                .unwrap_or_else(|| "inf".to_string()),
            lo_closed: interval.lo_closed(),
            hi_closed: interval.hi_closed(),
            lo_decimal: interval.lo().to_f64(),
            hi_decimal: interval.hi().map(Rational::to_f64),
        }
    }
}

/// Interval report for every roster candidate, in roster order. Candidates
/// outside the potential winner set get an empty interval list.
pub fn interval_report(
    election: &Election,
    report: &PotentialWinnerReport,
) -> Vec<IntervalReportJson> {
    (0..election.candidate_count())
        .map(|j| IntervalReportJson {
            candidate: election.candidates().id(j).to_string(),
            intervals: report
                .interval_of(j)
                .intervals()
                .iter()
                .map(IntervalJson::from)
                .collect(),
        })
        .collect()
}
