//! The fluid-flow event loop.
//!
//! Between events every transferring channel moves its file at the model
//! rate; rates are recomputed whenever the active set changes. Events at
//! equal times are processed in a total order (kind, then chunk priority,
//! then file id / channel index) so runs are bit-reproducible.

use std::collections::VecDeque;

use crate::chunk::{Chunk, ChunkType, TransferParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::estimator::find_optimal_parameters;
use crate::partition::partition_files;
use crate::profile::NetworkProfile;
use crate::sched::{
    initial_allocation, periodic_reallocate, reallocate_on_completion, Algorithm,
    ChannelAllocation, ChunkProgress, EtaSnapshot, SchedulerConfig,
};
use crate::sim::report::{
    AllocEvent, AllocReason, ChunkSummary, FileCompletion, Sample, SimReport,
};
use crate::sim::ThroughputModel;

/// Partition a dataset, estimate per-chunk parameters, and simulate.
pub fn run_simulation(
    dataset: &Dataset,
    profile: &NetworkProfile,
    config: &SchedulerConfig,
    model: &dyn ThroughputModel,
) -> Result<SimReport> {
    config.validate()?;
    let chunks = partition_files(dataset, profile, config.k_chunks)?;
    let planned: Result<Vec<Chunk>> = chunks
        .into_iter()
        .map(|c| {
            let params = find_optimal_parameters(
                c.avg_file_size,
                profile.bdp(),
                profile.buffer_size(),
                config.max_cc,
            )?;
            Ok(c.with_params(params))
        })
        .collect();
    simulate_plan(planned?, profile, config, model)
}

/// Simulate an explicit plan: chunks with parameters already assigned.
pub fn simulate_plan(
    chunks: Vec<Chunk>,
    profile: &NetworkProfile,
    config: &SchedulerConfig,
    model: &dyn ThroughputModel,
) -> Result<SimReport> {
    config.validate()?;
    let mut engine = Engine::new(chunks, profile, config, model)?;
    engine.start();
    engine.run()?;
    Ok(engine.into_report())
}

#[derive(Debug, Clone)]
enum ChState {
    Transferring {
        file: usize,
        size: u64,
        remaining: f64,
        rate: f64,
        completes_at: f64,
    },
    Gap { until: f64 },
    Reconnect { until: f64 },
    Idle,
}

#[derive(Debug, Clone)]
struct Channel {
    chunk: usize,
    state: ChState,
}

struct ChunkState {
    chunk_type: ChunkType,
    files: Vec<crate::dataset::FileEntry>,
    params: TransferParams,
    avg_file_size: f64,
    total_bytes: u64,
    queue: VecDeque<usize>,
    queued_bytes: u64,
    in_flight: u32,
    done: bool,
    completion_time: f64,
}

impl ChunkState {
    fn unfinished(&self) -> bool {
        !self.done
    }
}

struct Engine<'a> {
    profile: &'a NetworkProfile,
    config: &'a SchedulerConfig,
    model: &'a dyn ThroughputModel,
    algorithm: Algorithm,
    chunks: Vec<ChunkState>,
    type_index: [Option<usize>; 4],
    channels: Vec<Channel>,
    alloc: ChannelAllocation,
    t: f64,
    next_tick: u64,
    eta_history: Vec<EtaSnapshot>,
    /// A periodic move waiting for a donor channel to reach a file boundary.
    pending_periodic: Option<(usize, usize)>,
    sc_phase: usize,
    samples: Vec<Sample>,
    allocations: Vec<AllocEvent>,
    completions: Vec<FileCompletion>,
    total_bytes: u64,
    file_count: usize,
    audit: Vec<String>,
}

impl<'a> Engine<'a> {
    fn new(
        chunks: Vec<Chunk>,
        profile: &'a NetworkProfile,
        config: &'a SchedulerConfig,
        model: &'a dyn ThroughputModel,
    ) -> Result<Self> {
        if chunks.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut states = Vec::with_capacity(chunks.len());
        let mut type_index = [None; 4];
        let mut total_bytes = 0u64;
        let mut file_count = 0usize;
        let mut ordered = chunks;
        // Engine chunk order is ascending size order, which is also the SC
        // phase order.
        ordered.sort_by_key(|c| c.chunk_type.index());
        for (idx, c) in ordered.into_iter().enumerate() {
            let params = c.params.ok_or_else(|| {
                Error::InvalidParameter(format!("chunk {} has no transfer params", c.chunk_type))
            })?;
            if config.algorithm == Algorithm::Sc && params.concurrency > config.max_cc {
                return Err(Error::InvalidParameter(format!(
                    "chunk {} concurrency {} exceeds max_cc {}",
                    c.chunk_type, params.concurrency, config.max_cc
                )));
            }
            if type_index[c.chunk_type.index()].is_some() {
                return Err(Error::InvalidParameter(format!(
                    "two chunks of type {}",
                    c.chunk_type
                )));
            }
            type_index[c.chunk_type.index()] = Some(idx);
            total_bytes += c.total_size;
            file_count += c.files.len();
            states.push(ChunkState {
                chunk_type: c.chunk_type,
                queue: (0..c.files.len()).collect(),
                queued_bytes: c.total_size,
                avg_file_size: c.avg_file_size,
                total_bytes: c.total_size,
                files: c.files,
                params,
                in_flight: 0,
                done: false,
                completion_time: 0.0,
            });
        }
        Ok(Self {
            profile,
            config,
            model,
            algorithm: config.algorithm,
            chunks: states,
            type_index,
            channels: Vec::new(),
            alloc: ChannelAllocation::default(),
            t: 0.0,
            next_tick: 1,
            eta_history: Vec::new(),
            pending_periodic: None,
            sc_phase: 0,
            samples: Vec::new(),
            allocations: Vec::new(),
            completions: Vec::new(),
            total_bytes,
            file_count,
            audit: Vec::new(),
        })
    }

    fn check(&mut self, cond: bool, msg: impl FnOnce() -> String) {
        if !cond {
            self.audit.push(format!("t={}: {}", self.t, msg()));
        }
    }

    /// Conservation and safety checks, run at every decision point.
    fn audit_allocation(&mut self, context: &str) {
        let total = self.alloc.total();
        let max_cc = self.config.max_cc;
        let any_unfinished = self.chunks.iter().any(|c| c.unfinished());
        self.check(total <= max_cc, || {
            format!("{context}: {total} channels allocated, budget {max_cc}")
        });
        match self.algorithm {
            Algorithm::Mc | Algorithm::ProMc => {
                self.check(!any_unfinished || total == max_cc, || {
                    format!("{context}: {total} of {max_cc} channels allocated with work left")
                });
            }
            Algorithm::Sc => {
                let active_types = (0..4).filter(|i| self.alloc.0[*i] > 0).count();
                self.check(active_types <= 1, || {
                    format!("{context}: SC has {active_types} chunks with channels")
                });
            }
        }
        // Work conservation: unfinished work means channels exist to do it.
        self.check(!any_unfinished || !self.channels.is_empty(), || {
            format!("{context}: work remains but no channels exist")
        });
        // Finished chunks hold nothing; bookkeeping matches physical channels.
        for idx in 0..self.chunks.len() {
            let t = self.chunks[idx].chunk_type;
            let count = self.alloc.get(t);
            if self.chunks[idx].done && any_unfinished {
                self.check(count == 0, || {
                    format!("{context}: finished chunk {t} still holds {count} channels")
                });
            }
            if self.algorithm != Algorithm::Sc && any_unfinished {
                let physical = self.channels.iter().filter(|c| c.chunk == idx).count() as u32;
                self.check(physical == count, || {
                    format!("{context}: chunk {t} has {physical} channels but {count} booked")
                });
            }
        }
    }

    fn start(&mut self) {
        match self.algorithm {
            Algorithm::Sc => self.start_sc_phase(0, false),
            Algorithm::Mc | Algorithm::ProMc => {
                let plain: Vec<Chunk> = self
                    .chunks
                    .iter()
                    .map(|s| {
                        Chunk::new(s.chunk_type, s.files.clone())
                            .expect("chunk state is non-empty")
                    })
                    .collect();
                self.alloc = initial_allocation(
                    self.algorithm,
                    &plain,
                    self.config.max_cc,
                    &self.config.delta,
                );
                for idx in 0..self.chunks.len() {
                    let t = self.chunks[idx].chunk_type;
                    let n = self.alloc.get(t);
                    self.allocations.push(AllocEvent {
                        time: 0.0,
                        reason: AllocReason::Initial,
                        chunk: t,
                        from: None,
                        channels: n,
                    });
                    for _ in 0..n {
                        self.channels.push(Channel { chunk: idx, state: ChState::Idle });
                    }
                }
                for ch in 0..self.channels.len() {
                    self.start_next_file(ch);
                }
            }
        }
        self.audit_allocation("start");
    }

    /// Tear down and bring up channels for an SC phase. Later phases pay
    /// the reconnect delay; the first one rides the initial connections.
    fn start_sc_phase(&mut self, phase: usize, reconnect: bool) {
        self.sc_phase = phase;
        self.channels.clear();
        self.alloc = ChannelAllocation::default();
        let Some(cs) = self.chunks.get(phase) else { return };
        let conc = cs.params.concurrency;
        let t = cs.chunk_type;
        self.alloc.set(t, conc);
        self.allocations.push(AllocEvent {
            time: self.t,
            reason: if reconnect { AllocReason::PhaseStart } else { AllocReason::Initial },
            chunk: t,
            from: None,
            channels: conc,
        });
        let delay = if reconnect {
            self.model.reconnect_delay(&cs.params, self.profile)
        } else {
            0.0
        };
        for _ in 0..conc {
            self.channels.push(Channel {
                chunk: phase,
                state: if delay > 0.0 {
                    ChState::Reconnect { until: self.t + delay }
                } else {
                    ChState::Idle
                },
            });
        }
        if delay <= 0.0 {
            for ch in 0..self.channels.len() {
                self.start_next_file(ch);
            }
        }
        if reconnect {
            self.audit_allocation("phase start");
        }
    }

    fn all_done(&self) -> bool {
        self.chunks.iter().all(|c| c.done)
    }

    fn run(&mut self) -> Result<()> {
        while !self.all_done() {
            self.recompute_rates()?;
            let t_next = self.next_event_time()?;
            self.advance_to(t_next);
            self.process_events()?;
        }
        Ok(())
    }

    fn recompute_rates(&mut self) -> Result<()> {
        let n_active = self
            .channels
            .iter()
            .filter(|c| matches!(c.state, ChState::Transferring { .. }))
            .count() as u32;
        for ch in &mut self.channels {
            if let ChState::Transferring { size, remaining, rate, completes_at, .. } = &mut ch.state {
                let params = &self.chunks[ch.chunk].params;
                let r = self.model.rate(*size as f64, params, self.profile, n_active);
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::Simulation(format!(
                        "model returned non-positive rate {r} for a {} byte file",
                        size
                    )));
                }
                *rate = r;
                *completes_at = self.t + *remaining / r;
            }
        }
        Ok(())
    }

    fn next_event_time(&self) -> Result<f64> {
        let mut t_next = f64::INFINITY;
        let mut any_pending = false;
        for ch in &self.channels {
            let candidate = match ch.state {
                ChState::Transferring { completes_at, .. } => completes_at,
                ChState::Gap { until } | ChState::Reconnect { until } => until,
                ChState::Idle => continue,
            };
            any_pending = true;
            if candidate < t_next {
                t_next = candidate;
            }
        }
        if !any_pending {
            return Err(Error::Simulation(
                "stalled: unfinished chunks but no channel can make progress".into(),
            ));
        }
        let tick = self.next_tick as f64 * self.config.realloc_period;
        Ok(t_next.min(tick))
    }

    fn advance_to(&mut self, t_next: f64) {
        let dt = t_next - self.t;
        for ch in &mut self.channels {
            if let ChState::Transferring { remaining, rate, completes_at, .. } = &mut ch.state {
                if *completes_at == t_next {
                    *remaining = 0.0;
                } else if dt > 0.0 {
                    *remaining = (*remaining - *rate * dt).max(0.0);
                }
            }
        }
        self.t = t_next;
    }

    fn process_events(&mut self) -> Result<()> {
        let t = self.t;

        // File completions, ordered by chunk priority then file id.
        let mut completing: Vec<(usize, usize)> = self
            .channels
            .iter()
            .enumerate()
            .filter_map(|(i, ch)| match ch.state {
                ChState::Transferring { completes_at, file, .. } if completes_at == t => {
                    Some((i, file))
                }
                _ => None,
            })
            .collect();
        completing.sort_by(|a, b| {
            let ca = &self.chunks[self.channels[a.0].chunk];
            let cb = &self.chunks[self.channels[b.0].chunk];
            ca.chunk_type
                .priority_rank()
                .cmp(&cb.chunk_type.priority_rank())
                .then_with(|| ca.files[a.1].id.cmp(&cb.files[b.1].id))
        });
        for (ch_idx, _) in completing {
            self.complete_file(ch_idx);
        }

        // Gap and reconnect expiries.
        for want_gap in [true, false] {
            let mut expiring: Vec<usize> = self
                .channels
                .iter()
                .enumerate()
                .filter_map(|(i, ch)| match ch.state {
                    ChState::Gap { until } if want_gap && until == t => Some(i),
                    ChState::Reconnect { until } if !want_gap && until == t => Some(i),
                    _ => None,
                })
                .collect();
            expiring.sort_by_key(|i| {
                (self.chunks[self.channels[*i].chunk].chunk_type.priority_rank(), *i)
            });
            for ch_idx in expiring {
                self.start_next_file(ch_idx);
            }
        }

        if self.next_tick as f64 * self.config.realloc_period == t {
            // Completions at this instant may have started fresh files whose
            // rates are not set yet; refresh so the tick reads live throughput.
            self.recompute_rates()?;
            self.process_tick();
            self.next_tick += 1;
        }
        Ok(())
    }

    fn complete_file(&mut self, ch_idx: usize) {
        let chunk_idx = self.channels[ch_idx].chunk;
        let ChState::Transferring { file, size, .. } = self.channels[ch_idx].state else {
            return;
        };
        let t = self.t;
        {
            let cs = &mut self.chunks[chunk_idx];
            cs.in_flight -= 1;
            self.completions.push(FileCompletion {
                id: cs.files[file].id.clone(),
                chunk: cs.chunk_type,
                size_bytes: size,
                time: t,
            });
        }
        self.channels[ch_idx].state = ChState::Idle;

        let finished = {
            let cs = &self.chunks[chunk_idx];
            cs.queue.is_empty() && cs.in_flight == 0
        };
        if finished {
            self.chunks[chunk_idx].done = true;
            self.chunks[chunk_idx].completion_time = t;
            if let Some((donor, target)) = self.pending_periodic {
                if donor == chunk_idx || target == chunk_idx {
                    self.pending_periodic = None;
                }
            }
            self.on_chunk_complete(chunk_idx);
            return;
        }

        // A pending fast-to-slow move applies at the donor's next file
        // boundary, which is here.
        if let Some((donor, target)) = self.pending_periodic {
            if donor == chunk_idx {
                self.pending_periodic = None;
                if !self.chunks[target].done {
                    self.move_channel(ch_idx, target, AllocReason::Periodic);
                    return;
                }
            }
        }

        let gap = self.model.per_file_gap(&self.chunks[chunk_idx].params, self.profile);
        if self.chunks[chunk_idx].queue.is_empty() {
            // Nothing left to pull; the chunk finishes when in-flight files drain.
        } else if gap > 0.0 {
            self.channels[ch_idx].state = ChState::Gap { until: t + gap };
        } else {
            self.start_next_file(ch_idx);
        }
    }

    /// Pull the next queued file, or go idle if the queue is dry.
    fn start_next_file(&mut self, ch_idx: usize) {
        let chunk_idx = self.channels[ch_idx].chunk;
        let cs = &mut self.chunks[chunk_idx];
        match cs.queue.pop_front() {
            Some(file) => {
                let size = cs.files[file].size_bytes;
                cs.queued_bytes -= size;
                cs.in_flight += 1;
                self.channels[ch_idx].state = ChState::Transferring {
                    file,
                    size,
                    remaining: size as f64,
                    rate: 0.0,
                    completes_at: f64::INFINITY,
                };
            }
            None => {
                self.channels[ch_idx].state = ChState::Idle;
            }
        }
    }

    fn on_chunk_complete(&mut self, chunk_idx: usize) {
        match self.algorithm {
            Algorithm::Sc => {
                let next = self.sc_phase + 1;
                if next < self.chunks.len() {
                    self.start_sc_phase(next, true);
                } else {
                    self.channels.clear();
                    self.alloc = ChannelAllocation::default();
                }
            }
            Algorithm::Mc | Algorithm::ProMc => self.handoff_completed_channels(chunk_idx),
        }
    }

    /// Give a finished chunk's channels away, one at a time, each to the
    /// unfinished chunk with the largest marginal ETA.
    fn handoff_completed_channels(&mut self, chunk_idx: usize) {
        let finished_type = self.chunks[chunk_idx].chunk_type;
        let unfinished: Vec<ChunkType> = self
            .chunks
            .iter()
            .filter(|c| c.unfinished())
            .map(|c| c.chunk_type)
            .collect();

        // Marginal ETA oracle: remaining bytes over the rate the model would
        // give each of `n` channels in the steady state of max_cc actives.
        let remaining: Vec<f64> = (0..self.chunks.len()).map(|i| self.chunk_remaining(i)).collect();
        let unit_rate: Vec<f64> = self
            .chunks
            .iter()
            .map(|c| {
                self.model
                    .rate(c.avg_file_size, &c.params, self.profile, self.config.max_cc)
            })
            .collect();
        let type_index = self.type_index;
        let eta = |t: ChunkType, n: u32| {
            let idx = type_index[t.index()].expect("unfinished chunk exists");
            remaining[idx] / (n as f64 * unit_rate[idx])
        };

        let (new_alloc, moves) = reallocate_on_completion(&self.alloc, finished_type, &unfinished, eta);
        self.alloc = new_alloc;

        let donors: Vec<usize> = self
            .channels
            .iter()
            .enumerate()
            .filter(|(_, ch)| ch.chunk == chunk_idx)
            .map(|(i, _)| i)
            .collect();
        // No moves when the last chunk finishes; otherwise one per channel.
        debug_assert!(moves.is_empty() || donors.len() == moves.len());
        for (ch_idx, target_type) in donors.into_iter().zip(moves) {
            let target = self.type_index[target_type.index()].expect("target chunk exists");
            self.move_channel_without_alloc(ch_idx, target, finished_type, AllocReason::Completion);
        }
        let now_zero = self.alloc.get(finished_type) == 0;
        self.check(now_zero, || format!("handoff left channels on finished {finished_type}"));
        self.audit_allocation("completion handoff");
    }

    /// Move a channel now, updating the allocation bookkeeping.
    fn move_channel(&mut self, ch_idx: usize, target: usize, reason: AllocReason) {
        let from_idx = self.channels[ch_idx].chunk;
        let from_type = self.chunks[from_idx].chunk_type;
        let to_type = self.chunks[target].chunk_type;
        self.alloc.set(from_type, self.alloc.get(from_type) - 1);
        self.alloc.add(to_type, 1);
        self.move_channel_without_alloc(ch_idx, target, from_type, reason);
        if reason == AllocReason::Periodic {
            let donor_left = self.alloc.get(from_type);
            let donor_unfinished = self.chunks[from_idx].unfinished();
            self.check(!donor_unfinished || donor_left >= 1, || {
                format!("periodic move drained donor {from_type}")
            });
            self.audit_allocation("periodic move");
        }
    }

    fn move_channel_without_alloc(
        &mut self,
        ch_idx: usize,
        target: usize,
        from_type: ChunkType,
        reason: AllocReason,
    ) {
        let params = self.chunks[target].params;
        let delay = self.model.reconnect_delay(&params, self.profile);
        self.channels[ch_idx].chunk = target;
        self.allocations.push(AllocEvent {
            time: self.t,
            reason,
            chunk: self.chunks[target].chunk_type,
            from: Some(from_type),
            channels: 1,
        });
        if delay > 0.0 {
            self.channels[ch_idx].state = ChState::Reconnect { until: self.t + delay };
        } else {
            self.start_next_file(ch_idx);
        }
    }

    fn chunk_remaining(&self, chunk_idx: usize) -> f64 {
        let mut remaining = self.chunks[chunk_idx].queued_bytes as f64;
        for ch in &self.channels {
            if ch.chunk == chunk_idx {
                if let ChState::Transferring { remaining: rem, .. } = ch.state {
                    remaining += rem;
                }
            }
        }
        remaining
    }

    fn chunk_throughput(&self, chunk_idx: usize) -> f64 {
        self.channels
            .iter()
            .filter(|ch| ch.chunk == chunk_idx)
            .map(|ch| match ch.state {
                ChState::Transferring { rate, .. } => rate,
                _ => 0.0,
            })
            .sum()
    }

    fn process_tick(&mut self) {
        self.audit_allocation("tick");
        for idx in 0..self.chunks.len() {
            let cs = &self.chunks[idx];
            self.samples.push(Sample {
                time: self.t,
                chunk: cs.chunk_type,
                channels: self.alloc.get(cs.chunk_type),
                throughput: self.chunk_throughput(idx),
                remaining: self.chunk_remaining(idx),
            });
        }

        if self.algorithm != Algorithm::ProMc {
            return;
        }
        let mut etas = [None; 4];
        for (idx, cs) in self.chunks.iter().enumerate() {
            if cs.unfinished() {
                let progress = ChunkProgress {
                    remaining_bytes: self.chunk_remaining(idx),
                    current_throughput: self.chunk_throughput(idx),
                };
                etas[cs.chunk_type.index()] = Some(progress.eta());
            }
        }
        self.eta_history.push(EtaSnapshot { etas });

        if self.pending_periodic.is_some() {
            return;
        }
        if let Some((from_t, to_t)) = periodic_reallocate(&self.eta_history, &self.alloc, self.config) {
            self.eta_history.clear();
            let from = self.type_index[from_t.index()].expect("fast chunk exists");
            let to = self.type_index[to_t.index()].expect("slow chunk exists");
            self.apply_periodic_move(from, to);
        }
    }

    /// Move a donor channel at a file boundary: an idle or gapped channel
    /// moves now, otherwise the first donor channel to finish its current
    /// file carries the move (files are never preempted).
    fn apply_periodic_move(&mut self, from: usize, to: usize) {
        let pick = |engine: &Engine, idle: bool| {
            engine.channels.iter().enumerate().find_map(|(i, ch)| {
                if ch.chunk != from {
                    return None;
                }
                match ch.state {
                    ChState::Idle if idle => Some(i),
                    ChState::Gap { .. } if !idle => Some(i),
                    _ => None,
                }
            })
        };
        if let Some(ch_idx) = pick(self, true).or_else(|| pick(self, false)) {
            self.move_channel(ch_idx, to, AllocReason::Periodic);
        } else {
            self.pending_periodic = Some((from, to));
        }
    }

    fn into_report(self) -> SimReport {
        let total_time = self.t;
        let chunks = self
            .chunks
            .iter()
            .map(|c| ChunkSummary {
                chunk: c.chunk_type,
                file_count: c.files.len(),
                total_bytes: c.total_bytes,
                avg_file_size: c.avg_file_size,
                params: c.params,
                completion_time: c.completion_time,
            })
            .collect();
        SimReport {
            algorithm: self.algorithm,
            profile: self.profile.name().to_string(),
            k_chunks: self.config.k_chunks,
            max_cc: self.config.max_cc,
            file_count: self.file_count,
            total_bytes: self.total_bytes,
            total_time,
            aggregate_throughput: if total_time > 0.0 {
                self.total_bytes as f64 / total_time
            } else {
                0.0
            },
            chunks,
            samples: self.samples,
            allocations: self.allocations,
            file_completions: self.completions,
            audit: self.audit,
        }
    }
}
