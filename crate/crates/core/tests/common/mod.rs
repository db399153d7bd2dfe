//! Instance generation and per-instance invariant checks shared by the
//! property tests and the acceptance suite.
#![allow(dead_code)]

use tweezer_pca::ensemble::{plan, reservoir_range, run_trial};
use tweezer_pca::loading::load_stochastic;
use tweezer_pca::metrics::{tally, time_of, Event, Stage};
use tweezer_pca::rng::Xoshiro256;
use tweezer_pca::schedule::{export_schedule, replay};
use tweezer_pca::{make_spec, GridSpec, MoveLog, Protocol, ReservoirMode, TimeModel};

/// A random geometry with `L ≤ max_side`, chosen from `seed`. Grid sides
/// range from the default reservoir size to the saturated one.
pub fn random_spec(seed: u64, max_side: usize) -> GridSpec {
    let mut rng = Xoshiro256::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let l = 1 + (rng.next_u64() % max_side as u64) as usize;
    let fill = [0.3, 0.5, 0.5, 0.7, 0.9][(rng.next_u64() % 5) as usize];
    let mode = match rng.next_u64() % 3 {
        0 => ReservoirMode::Default,
        1 => ReservoirMode::Saturated,
        _ => {
            let range = reservoir_range(l, fill).unwrap();
            ReservoirMode::Explicit(range[(rng.next_u64() % range.len() as u64) as usize])
        }
    };
    make_spec(l, fill, mode).unwrap()
}

const PROTOCOLS: [Protocol; 3] = [Protocol::FULL, Protocol::PARTIAL, Protocol::SINGLE];

fn stage_only(log: &MoveLog, stage: Stage) -> MoveLog {
    let mut out = MoveLog::new();
    let mut last = None;
    let mut op = 0;
    for e in log.entries().iter().filter(|e| e.stage == stage) {
        if last != Some(e.op) {
            op = out.begin_op();
            last = Some(e.op);
        }
        out.push(op, e.stage, e.event.clone());
    }
    out
}

/// Every per-instance invariant of the planner on the board loaded from
/// `seed`. Returns a description of each violation.
pub fn check_instance(spec: &GridSpec, seed: u64) -> Vec<String> {
    let mut bad = Vec::new();
    let tm = TimeModel::default();
    let initial = load_stochastic(spec, seed);
    let tag = format!("L={} L'={} p={} seed={seed}", spec.target_side(), spec.grid_side(), spec.fill());
    let mut times = Vec::new();
    let mut finals = Vec::new();

    for protocol in PROTOCOLS {
        for cr in [false, true] {
            let protocol = protocol.with_continuous_release(cr);
            let p = plan(&initial, spec, protocol);
            let m = tally(&p.log);
            let who = format!("{tag} {protocol}");

            if p.final_board.atom_count() != initial.atom_count() {
                bad.push(format!("{who}: atom count changed"));
            }
            let sched = export_schedule(&p.log, spec, &tm);
            match replay(&sched, &initial) {
                Ok(b) if b == p.final_board => {}
                Ok(_) => bad.push(format!("{who}: replay ends on a different board")),
                Err(e) => bad.push(format!("{who}: replay failed: {e}")),
            }
            if sched.metrics() != m {
                bad.push(format!("{who}: schedule counters differ from tally"));
            }
            if sched.total_duration_us != time_of(&m, &tm) {
                bad.push(format!("{who}: schedule total differs from time_of"));
            }
            let vacant = p.final_board.target_vacancies(spec);
            if vacant != p.unfilled.len() {
                bad.push(format!("{who}: {vacant} target vacancies but {} reported", p.unfilled.len()));
            }
            if p.unfilled.iter().any(|&s| p.final_board.is_filled(s)) {
                bad.push(format!("{who}: reported vacancy is filled"));
            }
            let split = tally(&stage_only(&p.log, Stage::Compression)) + tally(&stage_only(&p.log, Stage::Postprocess));
            if split != m {
                bad.push(format!("{who}: tally not additive over stages"));
            }
            let captured: usize = p.log.entries().iter().map(|e| match &e.event {
                Event::Capture { sites } => sites.len(),
                _ => 0,
            }).sum();
            let released: usize = p.log.entries().iter().map(|e| match &e.event {
                Event::Release { sites, .. } => sites.len(),
                _ => 0,
            }).sum();
            if captured != released {
                bad.push(format!("{who}: {captured} captured, {released} released"));
            }
            if protocol.parallelism == tweezer_pca::Parallelism::Single
                && m.m() < (initial.target_vacancies(spec) - p.unfilled.len()) as f64
            {
                bad.push(format!("{who}: M below the number of vacancies filled"));
            }
            if cr && m.r_para != m.c_para {
                bad.push(format!("{who}: R_para {} != op count {}", m.r_para, m.c_para));
            }
            finals.push((protocol, p.after_compression, p.final_board, m));
            if !cr {
                times.push(time_of(&m, &tm));
            }
        }
    }

    let (_, comp0, final0, _) = &finals[0];
    for (protocol, comp, fin, _) in &finals[1..] {
        if comp != comp0 || fin != final0 {
            bad.push(format!("{tag} {protocol}: final board differs from full"));
        }
    }
    for pair in finals.chunks(2) {
        let (a, b) = (&pair[0].3, &pair[1].3);
        let same_but_r = a.c_para == b.c_para && a.d_para == b.d_para && a.d_atoms == b.d_atoms
            && a.c_post == b.c_post && a.r_post == b.r_post && a.d_post == b.d_post && b.r_para <= a.r_para;
        if !same_but_r {
            bad.push(format!("{tag} {}: continuous release changed more than R_para", pair[1].0));
        }
    }
    if !(times[0] <= times[1] && times[1] <= times[2]) {
        bad.push(format!("{tag}: T ordering violated {times:?}"));
    }

    let a = run_trial(spec, Protocol::FULL, seed);
    let b = run_trial(spec, Protocol::FULL, seed);
    if (a.metrics, a.unfilled, a.realized_ratio) != (b.metrics, b.unfilled, b.realized_ratio) {
        bad.push(format!("{tag}: trial not deterministic"));
    }
    bad
}
