//! Exhaustive search over generator polynomials of one degree.
//!
//! Candidates are masks with bits `0` and `p` set, reduced to one
//! representative per reciprocal pair. Each candidate is filtered by order,
//! then profiled with the binary-split builder. While the profile is only
//! partly resolved its score is bracketed, and a candidate is dropped as soon
//! as its upper bound cannot reach any leaderboard it is eligible for. The
//! final leaderboard is the exact top-k regardless of worker count or
//! scheduling.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::checkpoint::{self, Checkpoint};
use crate::distance::DistanceEngine;
use crate::error::{Error, Result};
use crate::gf2poly::Gf2Poly;
use crate::profile::ProfileBuilder;

pub const MAX_SEARCH_DEGREE: u32 = 24;
/// Degrees above this need `allow_long_run`.
pub const LONG_RUN_DEGREE: u32 = 20;
pub const DEFAULT_BLOCK_SIZE: usize = 1 << 10;
pub const DEFAULT_TOP_K: usize = 8;

const CHECKPOINT_INTERVAL: Duration = Duration::from_secs(5);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateSource {
    /// Every canonical mask of degree `p`.
    Exhaustive,
    /// An explicit list; reduced to canonical representatives and deduped.
    List(Vec<Gf2Poly>),
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub p: u32,
    pub targets: Vec<usize>,
    pub workers: usize,
    pub top_k: usize,
    pub checkpoint_path: Option<PathBuf>,
    pub block_size: usize,
    pub source: CandidateSource,
    pub allow_long_run: bool,
    /// Stop after this many blocks in the current session (simulates an
    /// interruption; the checkpoint stays resumable).
    pub stop_after_blocks: Option<usize>,
    pub progress: bool,
}

impl SearchConfig {
    pub fn new(p: u32, targets: Vec<usize>) -> Self {
        SearchConfig {
            p,
            targets,
            workers: 1,
            top_k: DEFAULT_TOP_K,
            checkpoint_path: None,
            block_size: DEFAULT_BLOCK_SIZE,
            source: CandidateSource::Exhaustive,
            allow_long_run: false,
            stop_after_blocks: None,
            progress: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        if !(2..=MAX_SEARCH_DEGREE).contains(&p) {
            return Err(Error::InvalidConfig(format!(
                "degree {p} outside 2..={MAX_SEARCH_DEGREE}"
            )));
        }
        if p > LONG_RUN_DEGREE && !self.allow_long_run && self.source == CandidateSource::Exhaustive {
            return Err(Error::InvalidConfig(format!(
                "a full sweep at degree {p} is a long run; pass the long-run flag to confirm"
            )));
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidConfig("no target lengths".into()));
        }
        if self.targets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("targets must be strictly increasing".into()));
        }
        if self.targets[0] < p as usize + 1 {
            return Err(Error::InvalidConfig(format!(
                "target {} is below p + 1 = {}",
                self.targets[0],
                p + 1
            )));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidConfig("top_k must be at least 1".into()));
        }
        if self.block_size == 0 {
            return Err(Error::InvalidConfig("block size must be at least 1".into()));
        }
        if let CandidateSource::List(list) = &self.source {
            if let Some(bad) = list.iter().find(|g| g.degree() != p) {
                return Err(Error::InvalidConfig(format!(
                    "candidate {bad} has degree {}, expected {p}",
                    bad.degree()
                )));
            }
        }
        Ok(())
    }

    /// Stable text identifying everything that affects the result.
    pub fn identity(&self) -> String {
        let targets: Vec<String> = self.targets.iter().map(|m| m.to_string()).collect();
        let source = match &self.source {
            CandidateSource::Exhaustive => "all".to_string(),
            CandidateSource::List(list) => {
                let hexes: Vec<String> = canonical_list(list).iter().map(|g| g.to_hex()).collect();
                format!("list:{:016x}", checkpoint::fnv1a(hexes.join(",").as_bytes()))
            }
        };
        format!(
            "p={} targets={} top_k={} block_size={} source={}",
            self.p,
            targets.join(","),
            self.top_k,
            self.block_size,
            source
        )
    }
}

fn canonical_list(list: &[Gf2Poly]) -> Vec<Gf2Poly> {
    let mut out: Vec<Gf2Poly> = list.iter().map(|g| g.canonical()).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Every degree-`p` generator, one per reciprocal pair, ascending by mask.
pub fn enumerate_candidates(p: u32) -> Result<impl Iterator<Item = Gf2Poly>> {
    if !(2..=MAX_SEARCH_DEGREE).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "degree {p} outside 2..={MAX_SEARCH_DEGREE}"
        )));
    }
    Ok(candidates_in(p, 0..1u64 << (p - 1)))
}

fn candidates_in(p: u32, indices: std::ops::Range<u64>) -> impl Iterator<Item = Gf2Poly> {
    indices
        .map(move |i| Gf2Poly::new((1u64 << p) | (i << 1) | 1).expect("valid mask"))
        .filter(|g| g.is_canonical())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LeaderEntry {
    pub poly: Gf2Poly,
    pub order: u64,
    pub score: u64,
}

impl LeaderEntry {
    fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .cmp(&self.score)
            .then_with(|| other.order.cmp(&self.order))
            .then_with(|| self.poly.cmp(&other.poly))
    }
}

/// Per-target top-k, sorted by score descending, then order descending (a
/// tied polynomial usable at more lengths ranks first), then mask ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Leaderboard {
    top_k: usize,
    boards: BTreeMap<usize, Vec<LeaderEntry>>,
}

impl Leaderboard {
    pub fn new(targets: &[usize], top_k: usize) -> Self {
        Leaderboard {
            top_k,
            boards: targets.iter().map(|&m| (m, Vec::new())).collect(),
        }
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    pub fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        self.boards.keys().copied()
    }

    pub fn entries(&self, m: usize) -> &[LeaderEntry] {
        self.boards.get(&m).map_or(&[], |v| v.as_slice())
    }

    pub fn insert(&mut self, m: usize, entry: LeaderEntry) {
        let top_k = self.top_k;
        let board = self.boards.entry(m).or_default();
        if board.iter().any(|e| e.poly == entry.poly) {
            return;
        }
        let pos = board.partition_point(|e| e.rank_cmp(&entry) == Ordering::Less);
        if pos < top_k {
            board.insert(pos, entry);
            board.truncate(top_k);
        }
    }

    pub fn merge(&mut self, other: &Leaderboard) {
        for (&m, entries) in &other.boards {
            for &e in entries {
                self.insert(m, e);
            }
        }
    }

    /// Score a new entry must at least match to enter the board for `m`.
    pub fn threshold(&self, m: usize) -> Option<u64> {
        let board = self.boards.get(&m)?;
        (board.len() >= self.top_k).then(|| board[self.top_k - 1].score)
    }

    /// CSV `rank,M,poly_hex,degree,order,score`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rank,M,poly_hex,degree,order,score\n");
        for (&m, board) in &self.boards {
            for (rank, e) in board.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    rank + 1,
                    m,
                    e.poly,
                    e.poly.degree(),
                    e.order,
                    e.score
                );
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub candidates: u64,
    pub skipped_by_order: u64,
    pub pruned_by_bound: u64,
    pub scored: u64,
    pub evaluations: u64,
}

impl SearchStats {
    fn add(&mut self, other: &SearchStats) {
        self.candidates += other.candidates;
        self.skipped_by_order += other.skipped_by_order;
        self.pruned_by_bound += other.pruned_by_bound;
        self.scored += other.scored;
        self.evaluations += other.evaluations;
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub leaderboard: Leaderboard,
    pub completed_blocks: usize,
    pub total_blocks: usize,
    /// Stats for work done in this session only.
    pub stats: SearchStats,
}

impl SearchOutcome {
    pub fn is_complete(&self) -> bool {
        self.completed_blocks == self.total_blocks
    }
}

enum Blocks {
    Exhaustive { p: u32, index_count: u64, block_size: u64 },
    List { list: Vec<Gf2Poly>, block_size: usize },
}

impl Blocks {
    fn new(config: &SearchConfig) -> Self {
        match &config.source {
            CandidateSource::Exhaustive => Blocks::Exhaustive {
                p: config.p,
                index_count: 1u64 << (config.p - 1),
                block_size: config.block_size as u64,
            },
            CandidateSource::List(list) => Blocks::List {
                list: canonical_list(list),
                block_size: config.block_size,
            },
        }
    }

    fn count(&self) -> usize {
        match self {
            Blocks::Exhaustive { index_count, block_size, .. } => index_count.div_ceil(*block_size) as usize,
            Blocks::List { list, block_size } => list.len().div_ceil(*block_size),
        }
    }

    fn candidates(&self, block: usize) -> Vec<Gf2Poly> {
        match self {
            Blocks::Exhaustive { p, index_count, block_size } => {
                let lo = block as u64 * block_size;
                let hi = (lo + block_size).min(*index_count);
                candidates_in(*p, lo..hi).collect()
            }
            Blocks::List { list, block_size } => {
                let lo = block * block_size;
                let hi = (lo + block_size).min(list.len());
                list[lo..hi].to_vec()
            }
        }
    }
}

struct Shared {
    leaderboard: Leaderboard,
    completed: Vec<bool>,
    stats: SearchStats,
    last_save: Instant,
}

/// Runs (or resumes) a search and returns the exact per-target top-k.
pub fn run_search(config: &SearchConfig) -> Result<SearchOutcome> {
    config.validate()?;
    let blocks = Blocks::new(config);
    let total_blocks = blocks.count();
    let identity = config.identity();

    let (leaderboard, completed) = match &config.checkpoint_path {
        Some(path) if path.exists() => {
            let ckpt = Checkpoint::load(path)?;
            ckpt.check_matches(&identity, total_blocks, path)?;
            let mut board = Leaderboard::new(&config.targets, config.top_k);
            for (m, entry) in &ckpt.entries {
                if !config.targets.contains(m) {
                    return Err(Error::Checkpoint {
                        path: path.clone(),
                        msg: format!("entry for unknown target {m}"),
                    });
                }
                board.insert(*m, *entry);
            }
            (board, ckpt.completed)
        }
        _ => (Leaderboard::new(&config.targets, config.top_k), vec![false; total_blocks]),
    };

    let todo: Vec<usize> = (0..total_blocks).filter(|&b| !completed[b]).collect();
    let shared = Mutex::new(Shared {
        leaderboard,
        completed,
        stats: SearchStats::default(),
        last_save: Instant::now(),
    });
    let next = AtomicUsize::new(0);
    let claimed = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let budget = config.stop_after_blocks.unwrap_or(usize::MAX);
    let workers = config.workers.max(1).min(todo.len().max(1));
    let started = Instant::now();

    let worker = || -> Result<()> {
        let mut engine: Option<DistanceEngine> = None;
        loop {
            if failed.load(AtomicOrdering::Relaxed) {
                return Ok(());
            }
            if claimed.fetch_add(1, AtomicOrdering::SeqCst) >= budget {
                return Ok(());
            }
            let slot = next.fetch_add(1, AtomicOrdering::SeqCst);
            let Some(&block) = todo.get(slot) else {
                return Ok(());
            };
            let snapshot = shared.lock().unwrap().leaderboard.clone();
            let (local, stats) = match score_block(config, &blocks.candidates(block), snapshot, &mut engine) {
                Ok(r) => r,
                Err(e) => {
                    failed.store(true, AtomicOrdering::Relaxed);
                    return Err(e);
                }
            };
            let mut guard = shared.lock().unwrap();
            guard.leaderboard.merge(&local);
            guard.completed[block] = true;
            guard.stats.add(&stats);
            let done = guard.completed.iter().filter(|&&c| c).count();
            if let Some(path) = &config.checkpoint_path {
                if guard.last_save.elapsed() >= CHECKPOINT_INTERVAL {
                    save(path, &identity, &guard)?;
                    guard.last_save = Instant::now();
                }
            }
            if config.progress {
                eprintln!(
                    "[search p={}] block {done}/{total_blocks} ({:.1}s) scored {} pruned {} order-skipped {}",
                    config.p,
                    started.elapsed().as_secs_f64(),
                    guard.stats.scored,
                    guard.stats.pruned_by_bound,
                    guard.stats.skipped_by_order
                );
            }
        }
    };

    let results: Vec<Result<()>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers).map(|_| scope.spawn(worker)).collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
    });
    for r in results {
        r?;
    }

    let shared = shared.into_inner().unwrap();
    if let Some(path) = &config.checkpoint_path {
        save(path, &identity, &shared)?;
    }
    Ok(SearchOutcome {
        completed_blocks: shared.completed.iter().filter(|&&c| c).count(),
        total_blocks,
        leaderboard: shared.leaderboard,
        stats: shared.stats,
    })
}

fn save(path: &std::path::Path, identity: &str, shared: &Shared) -> Result<()> {
    Checkpoint {
        identity: identity.to_string(),
        completed: shared.completed.clone(),
        entries: shared
            .leaderboard
            .boards
            .iter()
            .flat_map(|(&m, board)| board.iter().map(move |&e| (m, e)))
            .collect(),
    }
    .save(path)
}

fn score_block(
    config: &SearchConfig,
    candidates: &[Gf2Poly],
    mut board: Leaderboard,
    engine: &mut Option<DistanceEngine>,
) -> Result<(Leaderboard, SearchStats)> {
    let mut stats = SearchStats::default();
    let mut local = Leaderboard::new(&config.targets, config.top_k);
    let min_target = config.targets[0];
    for &g in candidates {
        stats.candidates += 1;
        let order = g.order()?;
        if order < min_target as u64 {
            stats.skipped_by_order += 1;
            continue;
        }
        let eng = match engine {
            Some(e) => {
                e.reset(g)?;
                e
            }
            None => engine.insert(DistanceEngine::new(g)?),
        };
        let before = eng.evaluations();
        if let Some(scores) = score_candidate(order, &config.targets, &board, eng)? {
            stats.scored += 1;
            for (m, score) in scores {
                let entry = LeaderEntry { poly: g, order, score };
                board.insert(m, entry);
                local.insert(m, entry);
            }
        } else {
            stats.pruned_by_bound += 1;
        }
        stats.evaluations += (eng.evaluations() - before) as u64;
    }
    Ok((local, stats))
}

/// Exact scores for every target the candidate can still place on, or
/// `None` when its upper bound rules out all of them.
fn score_candidate(
    order: u64,
    targets: &[usize],
    board: &Leaderboard,
    engine: &mut DistanceEngine,
) -> Result<Option<Vec<(usize, u64)>>> {
    let applicable: Vec<usize> = targets.iter().copied().filter(|&m| m as u64 <= order).collect();
    let Some(&largest) = applicable.last() else {
        return Ok(None);
    };
    let mut builder = ProfileBuilder::new(engine, order, largest, &applicable)?;
    let live = |builder: &ProfileBuilder| -> Vec<usize> {
        applicable
            .iter()
            .copied()
            .filter(|&m| m <= builder.limit())
            .filter(|&m| match board.threshold(m) {
                Some(t) => builder.score_bounds(m).1 >= t,
                None => true,
            })
            .collect()
    };
    loop {
        let alive = live(&builder);
        let Some(&top) = alive.last() else {
            return Ok(None);
        };
        builder.truncate(top)?;
        if !builder.step()? {
            break;
        }
    }
    let alive = live(&builder);
    Ok(Some(
        alive
            .into_iter()
            .map(|m| {
                let (lo, hi) = builder.score_bounds(m);
                debug_assert_eq!(lo, hi);
                (m, lo)
            })
            .collect(),
    ))
}
