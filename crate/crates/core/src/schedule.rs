//! Move schedules: a flat, timed record stream derived from a [`MoveLog`],
//! suitable for driving (or inspecting) the tweezer hardware sequence.
//!
//! Replaying a schedule against the board it was planned on checks every
//! capture, sweep and release for collisions and reproduces the final board.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{GridSpec, Heading, Site};
use crate::loading::Occupancy;
use crate::metrics::{ramp_and_sweep_time, Event, Metrics, MoveLog, Stage, TimeModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Capture,
    Sweep,
    Release,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetRect {
    pub row: usize,
    pub col: usize,
    pub side: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleHeader {
    pub rows: usize,
    pub cols: usize,
    pub target: TargetRect,
    pub time_model: TimeModel,
    pub t2_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub op_index: usize,
    pub stage: Stage,
    pub event: RecordKind,
    /// Capture: traps ramped up. Sweep: held positions before the move.
    /// Release: traps where atoms are dropped.
    pub sites: Vec<Site>,
    /// Atoms held by the tweezer row while the record executes.
    pub tones: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<Heading>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    /// False for drops inside a continuous sweep, which cost no ramp.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp: Option<bool>,
    pub duration_us: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub header: ScheduleHeader,
    pub records: Vec<ScheduleRecord>,
    pub total_duration_us: f64,
}

impl ScheduleFile {
    /// Counters recomputed from the records alone.
    pub fn metrics(&self) -> Metrics {
        let mut m = Metrics::default();
        let mut op = usize::MAX;
        let mut carried = 0u64;
        for rec in &self.records {
            if rec.op_index != op {
                op = rec.op_index;
                carried = 0;
            }
            let (c, r, d) = match rec.stage {
                Stage::Compression => (&mut m.c_para, &mut m.r_para, &mut m.d_para),
                Stage::Postprocess => (&mut m.c_post, &mut m.r_post, &mut m.d_post),
            };
            match rec.event {
                RecordKind::Capture => *c += 1,
                RecordKind::Sweep => {
                    let s = rec.steps.unwrap_or(0) as u64;
                    *d += s;
                    carried += s;
                }
                RecordKind::Release => {
                    if rec.ramp.unwrap_or(true) {
                        *r += 1;
                    }
                    m.d_atoms += rec.sites.len() as u64 * carried;
                }
            }
        }
        m
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schedule serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("schedule: {e}")))
    }
}

fn shift(s: Site, h: Heading, steps: usize) -> Option<Site> {
    Some(match h {
        Heading::Up => Site::new(s.row.checked_sub(steps)?, s.col),
        Heading::Left => Site::new(s.row, s.col.checked_sub(steps)?),
        Heading::Down => Site::new(s.row + steps, s.col),
        Heading::Right => Site::new(s.row, s.col + steps),
    })
}

/// Converts a completed log into timed records. Capture and ramped release
/// records last `t₁`, sweeps `steps·t₂`; the total is evaluated from the
/// event counts exactly as [`crate::metrics::time_of`] does.
pub fn export_schedule(log: &MoveLog, spec: &GridSpec, tm: &TimeModel) -> ScheduleFile {
    let t2 = tm.t2_us();
    let mut records = Vec::with_capacity(log.entries().len());
    let mut held: Vec<Site> = Vec::new();
    let (mut ramps, mut steps_total) = (0u64, 0u64);
    for e in log.entries() {
        let rec = match &e.event {
            Event::Capture { sites } => {
                held.extend_from_slice(sites);
                ramps += 1;
                ScheduleRecord {
                    op_index: e.op,
                    stage: e.stage,
                    event: RecordKind::Capture,
                    sites: sites.clone(),
                    tones: held.len(),
                    heading: None,
                    steps: None,
                    ramp: None,
                    duration_us: tm.t1_us,
                }
            }
            Event::Travel { heading, steps } => {
                let before = held.clone();
                for s in &mut held {
                    *s = shift(*s, *heading, *steps).unwrap_or(*s);
                }
                steps_total += *steps as u64;
                ScheduleRecord {
                    op_index: e.op,
                    stage: e.stage,
                    event: RecordKind::Sweep,
                    sites: before,
                    tones: held.len(),
                    heading: Some(*heading),
                    steps: Some(*steps),
                    ramp: None,
                    duration_us: *steps as f64 * t2,
                }
            }
            Event::Release { sites, ramp } => {
                let tones = held.len();
                held.retain(|s| !sites.contains(s));
                if *ramp {
                    ramps += 1;
                }
                ScheduleRecord {
                    op_index: e.op,
                    stage: e.stage,
                    event: RecordKind::Release,
                    sites: sites.clone(),
                    tones,
                    heading: None,
                    steps: None,
                    ramp: Some(*ramp),
                    duration_us: if *ramp { tm.t1_us } else { 0.0 },
                }
            }
        };
        records.push(rec);
    }
    ScheduleFile {
        header: ScheduleHeader {
            rows: spec.grid_side(),
            cols: spec.grid_side(),
            target: TargetRect {
                row: spec.offset(),
                col: spec.offset(),
                side: spec.target_side(),
            },
            time_model: *tm,
            t2_us: t2,
        },
        records,
        total_duration_us: ramp_and_sweep_time(ramps, steps_total, tm),
    }
}

/// Executes `schedule` on a copy of `initial`, failing on any capture of an
/// empty trap, sweep through a filled trap, release onto a filled trap, or
/// atom left held when its operation ends.
pub fn replay(schedule: &ScheduleFile, initial: &Occupancy) -> Result<Occupancy> {
    let h = &schedule.header;
    if initial.height() != h.rows || initial.width() != h.cols {
        return Err(Error::Replay(format!(
            "board is {}x{}, schedule expects {}x{}",
            initial.height(),
            initial.width(),
            h.rows,
            h.cols
        )));
    }
    let mut occ = initial.clone();
    let mut held: Vec<Site> = Vec::new();
    let mut op = None;
    for (i, rec) in schedule.records.iter().enumerate() {
        if op != Some(rec.op_index) {
            if !held.is_empty() {
                return Err(Error::Replay(format!("record {i}: atoms still held from previous operation")));
            }
            op = Some(rec.op_index);
        }
        match rec.event {
            RecordKind::Capture => {
                for &s in &rec.sites {
                    if !occ.contains(s) || !occ.is_filled(s) {
                        return Err(Error::Replay(format!("record {i}: capture at empty trap {s}")));
                    }
                    occ.set(s, false);
                    held.push(s);
                }
            }
            RecordKind::Sweep => {
                let (Some(heading), Some(steps)) = (rec.heading, rec.steps) else {
                    return Err(Error::Replay(format!("record {i}: sweep without heading/steps")));
                };
                for s in &mut held {
                    for _ in 0..steps {
                        let next = s
                            .step(heading, h.rows, h.cols)
                            .ok_or_else(|| Error::Replay(format!("record {i}: sweep leaves the grid at {s}")))?;
                        if occ.is_filled(next) {
                            return Err(Error::Replay(format!("record {i}: sweep collides at {next}")));
                        }
                        *s = next;
                    }
                }
            }
            RecordKind::Release => {
                for &s in &rec.sites {
                    let Some(pos) = held.iter().position(|&x| x == s) else {
                        return Err(Error::Replay(format!("record {i}: no held atom at {s}")));
                    };
                    if occ.is_filled(s) {
                        return Err(Error::Replay(format!("record {i}: release onto filled trap {s}")));
                    }
                    held.swap_remove(pos);
                    occ.set(s, true);
                }
            }
        }
    }
    if !held.is_empty() {
        return Err(Error::Replay("atoms still held at end of schedule".into()));
    }
    Ok(occ)
}
