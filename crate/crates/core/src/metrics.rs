//! Population ratios, emotion heat fields, dominant paths and trajectory
//! similarity metrics (entropy, angular error, inter-group distance).

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Agent, AgentId, AgentSnapshot, Cell, Role, SimulationTrace, Strategy};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("direction undefined for a zero vector")]
    ZeroVector,
    #[error("heat map sigma must be > 0, got {0}")]
    NonPositiveSigma(f64),
    #[error("no path pairs could be matched")]
    NoMatches,
    #[error("exhaustive matching supports at most {max} paths per role, got {got}")]
    TooManyPaths { max: usize, got: usize },
}

/// Read access shared by live agents and recorded snapshots.
pub trait Observed {
    fn role(&self) -> Role;
    fn cell(&self) -> Cell;
    fn emotion(&self) -> f64;
    fn alive(&self) -> bool;
    fn strategy(&self) -> Option<Strategy>;
}

impl Observed for Agent {
    fn role(&self) -> Role {
        self.role
    }
    fn cell(&self) -> Cell {
        self.position
    }
    fn emotion(&self) -> f64 {
        self.emotion
    }
    fn alive(&self) -> bool {
        self.alive
    }
    fn strategy(&self) -> Option<Strategy> {
        self.active_strategy()
    }
}

impl Observed for AgentSnapshot {
    fn role(&self) -> Role {
        self.role
    }
    fn cell(&self) -> Cell {
        Cell::new(self.row, self.col)
    }
    fn emotion(&self) -> f64 {
        self.emotion
    }
    fn alive(&self) -> bool {
        self.alive
    }
    fn strategy(&self) -> Option<Strategy> {
        self.strategy
    }
}

pub fn live_count<A: Observed>(agents: &[A], role: Role) -> usize {
    agents.iter().filter(|a| a.alive() && a.role() == role).count()
}

/// Live activists over live activists plus live civilians; 0 when both are 0.
pub fn active_ratio<A: Observed>(agents: &[A]) -> f64 {
    let act = live_count(agents, Role::Activist);
    let civ = live_count(agents, Role::Civilian);
    if act + civ == 0 {
        0.0
    } else {
        act as f64 / (act + civ) as f64
    }
}

/// Share of live `side` agents currently playing cooperation; 0 when the
/// side has no live members.
pub fn cooperation_ratio<A: Observed>(agents: &[A], side: Role) -> f64 {
    let (mut live, mut coop) = (0usize, 0usize);
    for a in agents.iter().filter(|a| a.alive() && a.role() == side) {
        live += 1;
        if a.strategy() == Some(Strategy::Cooperation) {
            coop += 1;
        }
    }
    if live == 0 {
        0.0
    } else {
        coop as f64 / live as f64
    }
}

/// Mean emotion of live agents of `role`; 0 when there are none.
pub fn mean_emotion<A: Observed>(agents: &[A], role: Role) -> f64 {
    let (n, sum) = agents
        .iter()
        .filter(|a| a.alive() && a.role() == role)
        .fold((0usize, 0.0), |(n, s), a| (n + 1, s + a.emotion()));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Row-major field of signed emotion intensity; positive is cop-side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatField {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl HeatField {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}

pub const DEFAULT_HEAT_SIGMA: f64 = 1.5;

/// Every live cop deposits `+|e|` and every live activist `-|e|` as an
/// unnormalised Gaussian bump `exp(-d^2 / 2 sigma^2)` centred on its cell.
pub fn emotion_heatmap<A: Observed>(
    agents: &[A],
    rows: usize,
    cols: usize,
    sigma: f64,
) -> Result<HeatField, MetricsError> {
    if !(sigma > 0.0) {
        return Err(MetricsError::NonPositiveSigma(sigma));
    }
    let mut values = vec![0.0; rows * cols];
    let denom = 2.0 * sigma * sigma;
    for a in agents.iter().filter(|a| a.alive()) {
        let sign = match a.role() {
            Role::Cop => 1.0,
            Role::Activist => -1.0,
            Role::Civilian => continue,
        };
        let weight = sign * a.emotion().abs();
        let c = a.cell();
        for r in 0..rows {
            for k in 0..cols {
                let d2 = Cell::new(r, k).dist2(c) as f64;
                values[r * cols + k] += weight * (-d2 / denom).exp();
            }
        }
    }
    Ok(HeatField { rows, cols, values })
}

/// Group centre at one tick; `x` is the column and `y` the row coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub tick: u32,
    pub x: f64,
    pub y: f64,
}

/// Centre trajectory of one tracked same-role cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominantPath {
    pub role: Role,
    pub points: Vec<PathPoint>,
    /// Every agent that belonged to the cluster at some tick, ascending.
    pub members: Vec<AgentId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathParams {
    pub link_radius: f64,
    pub min_group: usize,
}

impl Default for PathParams {
    fn default() -> Self {
        PathParams { link_radius: 1.5, min_group: 3 }
    }
}

/// Single-linkage clusters of the given cells, each as sorted member ids.
fn clusters(members: &[(AgentId, Cell)], link_radius: f64) -> Vec<Vec<AgentId>> {
    let n = members.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if members[i].1.within(members[j].1, link_radius) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<AgentId>> = BTreeMap::new();
    for (i, &(id, _)) in members.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(id);
    }
    let mut out: Vec<Vec<AgentId>> = groups
        .into_values()
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

struct Track {
    path: DominantPath,
    last: BTreeSet<AgentId>,
    open: bool,
}

/// Clusters same-role live agents each tick and links clusters across
/// consecutive ticks by largest member overlap; each chain of linked
/// clusters yields the trajectory of its centre.
pub fn extract_dominant_paths(trace: &SimulationTrace, params: &PathParams) -> Vec<DominantPath> {
    let mut tracks: Vec<Track> = Vec::new();
    for snap in &trace.snapshots {
        let mut by_id: BTreeMap<AgentId, Cell> = BTreeMap::new();
        let mut found: Vec<(Role, Vec<AgentId>)> = Vec::new();
        for role in Role::ALL {
            let members: Vec<(AgentId, Cell)> = snap
                .agents
                .iter()
                .filter(|a| a.alive && a.role == role)
                .map(|a| (a.id, Cell::new(a.row, a.col)))
                .collect();
            by_id.extend(members.iter().copied());
            for g in clusters(&members, params.link_radius) {
                if g.len() >= params.min_group.max(1) {
                    found.push((role, g));
                }
            }
        }

        // (overlap, track, cluster), largest overlap first
        let mut links: Vec<(usize, usize, usize)> = Vec::new();
        for (ti, t) in tracks.iter().enumerate().filter(|(_, t)| t.open) {
            for (ci, (role, g)) in found.iter().enumerate() {
                if *role != t.path.role {
                    continue;
                }
                let overlap = g.iter().filter(|id| t.last.contains(id)).count();
                if overlap > 0 {
                    links.push((overlap, ti, ci));
                }
            }
        }
        links.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut cluster_track: Vec<Option<usize>> = vec![None; found.len()];
        let mut continued = vec![false; tracks.len()];
        for (_, ti, ci) in links {
            if !continued[ti] && cluster_track[ci].is_none() {
                continued[ti] = true;
                cluster_track[ci] = Some(ti);
            }
        }
        for (ti, t) in tracks.iter_mut().enumerate() {
            if !continued[ti] {
                t.open = false;
            }
        }
        for (ci, (role, g)) in found.into_iter().enumerate() {
            let n = g.len() as f64;
            let (sx, sy) = g.iter().fold((0.0, 0.0), |(sx, sy), id| {
                let c = by_id[id];
                (sx + c.col as f64, sy + c.row as f64)
            });
            let point = PathPoint { tick: snap.tick, x: sx / n, y: sy / n };
            let track = match cluster_track[ci] {
                Some(ti) => &mut tracks[ti],
                None => {
                    tracks.push(Track {
                        path: DominantPath { role, points: Vec::new(), members: Vec::new() },
                        last: BTreeSet::new(),
                        open: true,
                    });
                    tracks.last_mut().expect("just pushed")
                }
            };
            track.path.points.push(point);
            track.path.members.extend(g.iter().copied());
            track.last = g.into_iter().collect();
        }
    }
    tracks
        .into_iter()
        .map(|t| {
            let mut path = t.path;
            path.members.sort_unstable();
            path.members.dedup();
            path
        })
        .collect()
}

/// Angle in radians between two direction vectors.
pub fn angular_error(v_sim: (f64, f64), v_ref: (f64, f64)) -> Result<f64, MetricsError> {
    let na = v_sim.0.hypot(v_sim.1);
    let nb = v_ref.0.hypot(v_ref.1);
    if na == 0.0 || nb == 0.0 {
        return Err(MetricsError::ZeroVector);
    }
    // atan2 stays exact for (anti)parallel vectors where acos(cos) does not
    let dot = v_sim.0 * v_ref.0 + v_sim.1 * v_ref.1;
    let cross = v_sim.0 * v_ref.1 - v_sim.1 * v_ref.0;
    Ok(cross.abs().atan2(dot))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Matching {
    /// Repeatedly pair the two closest unmatched paths.
    #[default]
    Greedy,
    /// Minimum total distance over all maximum-size assignments.
    Exhaustive,
}

const EXHAUSTIVE_LIMIT: usize = 9;

/// Mean centre distance over the index-aligned common prefix, `None` when
/// the roles differ or a path is empty.
fn path_distance(a: &DominantPath, b: &DominantPath) -> Option<f64> {
    let n = a.points.len().min(b.points.len());
    if a.role != b.role || n == 0 {
        return None;
    }
    let total: f64 = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| (p.x - q.x).hypot(p.y - q.y))
        .sum();
    Some(total / n as f64)
}

/// One-to-one pairing of same-role paths, as `(sim index, ref index)`.
pub fn match_paths(
    sim: &[DominantPath],
    reference: &[DominantPath],
    matching: Matching,
) -> Result<Vec<(usize, usize)>, MetricsError> {
    let cost: Vec<Vec<Option<f64>>> = sim
        .iter()
        .map(|a| reference.iter().map(|b| path_distance(a, b)).collect())
        .collect();
    match matching {
        Matching::Greedy => {
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for (i, row) in cost.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    if let Some(c) = c {
                        pairs.push((*c, i, j));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut used_i = vec![false; sim.len()];
            let mut used_j = vec![false; reference.len()];
            let mut out = Vec::new();
            for (_, i, j) in pairs {
                if !used_i[i] && !used_j[j] {
                    used_i[i] = true;
                    used_j[j] = true;
                    out.push((i, j));
                }
            }
            out.sort_unstable();
            Ok(out)
        }
        Matching::Exhaustive => {
            let mut out = Vec::new();
            for role in Role::ALL {
                let is: Vec<usize> = (0..sim.len()).filter(|&i| sim[i].role == role).collect();
                let js: Vec<usize> = (0..reference.len()).filter(|&j| reference[j].role == role).collect();
                let got = is.len().max(js.len());
                if got > EXHAUSTIVE_LIMIT {
                    return Err(MetricsError::TooManyPaths { max: EXHAUSTIVE_LIMIT, got });
                }
                let mut best: (usize, f64, Vec<(usize, usize)>) = (0, 0.0, Vec::new());
                let mut current = Vec::new();
                let mut used = vec![false; js.len()];
                assign(&is, &js, &cost, 0, &mut used, &mut current, 0.0, &mut best);
                out.extend(best.2);
            }
            out.sort_unstable();
            Ok(out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assign(
    is: &[usize],
    js: &[usize],
    cost: &[Vec<Option<f64>>],
    k: usize,
    used: &mut [bool],
    current: &mut Vec<(usize, usize)>,
    total: f64,
    best: &mut (usize, f64, Vec<(usize, usize)>),
) {
    if k == is.len() {
        if current.len() > best.0 || (current.len() == best.0 && total < best.1) {
            *best = (current.len(), total, current.clone());
        }
        return;
    }
    let i = is[k];
    for (slot, &j) in js.iter().enumerate() {
        if used[slot] {
            continue;
        }
        if let Some(c) = cost[i][j] {
            used[slot] = true;
            current.push((i, j));
            assign(is, js, cost, k + 1, used, current, total + c, best);
            current.pop();
            used[slot] = false;
        }
    }
    assign(is, js, cost, k + 1, used, current, total, best);
}

pub const ENTROPY_EPSILON: f64 = 1e-6;

/// Differential entropy of a zero-mean bivariate Gaussian fitted to the
/// error vectors, covariance regularised by `ENTROPY_EPSILON * I`.
pub fn gaussian_entropy(errors: &[(f64, f64)]) -> f64 {
    let n = errors.len().max(1) as f64;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in errors {
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let (sxx, syy, sxy) = (sxx / n + ENTROPY_EPSILON, syy / n + ENTROPY_EPSILON, sxy / n);
    let det = sxx * syy - sxy * sxy;
    0.5 * ((2.0 * PI * E).powi(2) * det).ln()
}

/// Per-tick centre errors of every matched pair (sim minus ref), aligned by
/// index over the common length.
pub fn matched_errors(
    sim: &[DominantPath],
    reference: &[DominantPath],
    pairs: &[(usize, usize)],
) -> Vec<(f64, f64)> {
    pairs
        .iter()
        .flat_map(|&(i, j)| {
            sim[i]
                .points
                .iter()
                .zip(&reference[j].points)
                .map(|(p, q)| (p.x - q.x, p.y - q.y))
        })
        .collect()
}

/// Entropy of the matched centre errors; lower means more similar.
pub fn entropy_metric(
    sim: &[DominantPath],
    reference: &[DominantPath],
    matching: Matching,
) -> Result<f64, MetricsError> {
    let pairs = match_paths(sim, reference, matching)?;
    let errors = matched_errors(sim, reference, &pairs);
    if errors.is_empty() {
        return Err(MetricsError::NoMatches);
    }
    Ok(gaussian_entropy(&errors))
}

/// Mean angle between the per-tick movement directions of matched paths.
/// Steps where either centre stands still are skipped; `None` when no step
/// qualifies.
pub fn mean_angular_error(
    sim: &[DominantPath],
    reference: &[DominantPath],
    pairs: &[(usize, usize)],
) -> Option<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for &(i, j) in pairs {
        let (a, b) = (&sim[i].points, &reference[j].points);
        let len = a.len().min(b.len());
        for k in 1..len {
            let va = (a[k].x - a[k - 1].x, a[k].y - a[k - 1].y);
            let vb = (b[k].x - b[k - 1].x, b[k].y - b[k - 1].y);
            if let Ok(ae) = angular_error(va, vb) {
                total += ae;
                n += 1;
            }
        }
    }
    (n > 0).then(|| total / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdmOutcome {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn mean_pair_distance(points: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            total += (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1);
            pairs += 1;
        }
    }
    total / pairs as f64
}

fn centres_by_tick(paths: &[DominantPath]) -> BTreeMap<u32, Vec<(f64, f64)>> {
    let mut out: BTreeMap<u32, Vec<(f64, f64)>> = BTreeMap::new();
    for p in paths {
        for pt in &p.points {
            out.entry(pt.tick).or_default().push((pt.x, pt.y));
        }
    }
    out
}

/// Inter-group distance difference: at each tick where both sides show at
/// least two group centres, the gap between their mean pairwise centre
/// distances; averaged over those ticks.
pub fn idm(sim: &[DominantPath], reference: &[DominantPath]) -> IdmOutcome {
    if sim.len() < 2 || reference.len() < 2 {
        return IdmOutcome {
            value: 0.0,
            warning: Some("idm needs at least two paths on each side".into()),
        };
    }
    let a = centres_by_tick(sim);
    let b = centres_by_tick(reference);
    let mut total = 0.0;
    let mut n = 0usize;
    for (tick, pa) in &a {
        let Some(pb) = b.get(tick) else { continue };
        if pa.len() < 2 || pb.len() < 2 {
            continue;
        }
        total += (mean_pair_distance(pa) - mean_pair_distance(pb)).abs();
        n += 1;
    }
    if n == 0 {
        return IdmOutcome {
            value: 0.0,
            warning: Some("no tick shows two or more groups on both sides".into()),
        };
    }
    IdmOutcome { value: total / n as f64, warning: None }
}
