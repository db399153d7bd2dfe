use tweezer_pca::ensemble::plan;
use tweezer_pca::render::render_board;
use tweezer_pca::schedule::{export_schedule, replay, ScheduleFile};
use tweezer_pca::testing::{hand_trace_board, hand_trace_spec, HAND_TRACE};
use tweezer_pca::{GridSpec, Occupancy, Protocol, TimeModel};

fn data(name: &str) -> String {
    std::fs::read_to_string(format!("{}/tests/data/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

#[test]
fn stored_board_matches_fixture() {
    assert_eq!(data("hand_trace.txt"), HAND_TRACE);
}

#[test]
fn render_goldens() {
    let board = hand_trace_board();
    assert_eq!(render_board(&board, &hand_trace_spec()), data("hand_trace_render.txt").trim_end());
    let spec = GridSpec::new(4, 6, 0.5).unwrap();
    assert_eq!(render_board(&board, &spec), data("hand_trace_render_L4.txt").trim_end());
}

#[test]
fn schedule_replay_on_stored_board() {
    let board = Occupancy::from_snapshot(&data("hand_trace.txt")).unwrap();
    let tm = TimeModel::new(15.0, 2.0, 75.0).unwrap();
    for l in [2usize, 4, 6] {
        let spec = GridSpec::new(l, 6, 0.5).unwrap();
        let p = plan(&board, &spec, Protocol::FULL);
        let text = export_schedule(&p.log, &spec, &tm).to_json();
        let sched = ScheduleFile::from_json(&text).unwrap();
        assert_eq!(replay(&sched, &board).unwrap(), p.final_board, "L={l}");
        assert_eq!(sched.header.target.side, l);
    }
}

#[test]
fn tampered_schedule_is_rejected() {
    let board = hand_trace_board();
    let spec = GridSpec::new(4, 6, 0.5).unwrap();
    let p = plan(&board, &spec, Protocol::FULL);
    let mut sched = export_schedule(&p.log, &spec, &TimeModel::default());
    let sweep = sched
        .records
        .iter_mut()
        .find(|r| r.steps.is_some())
        .expect("plan has a sweep");
    *sweep.steps.as_mut().unwrap() += 20;
    assert!(replay(&sched, &board).is_err());
}
