mod common;

use common::*;
use dawkit::instruments::Sampler;
use dawkit::processors::{Add, Biquad, Gain, Oscillator, Playback};
use dawkit::{AudioBuffer, ControlSignal, Graph, GraphError};
use proptest::prelude::*;

/// Graph whose k-th inserted node has rank `order[k]` and reads from nodes
/// of lower rank chosen by `picks[k]`. Sources are oscillators, the rest
/// buses. Nodes are added once their inputs exist, so insertion order
/// differs from rank order.
fn build_dag(order: &[usize], picks: &[Vec<usize>]) -> Graph {
    let n = order.len();
    let mut by_rank = vec![0; n];
    for (k, &r) in order.iter().enumerate() {
        by_rank[r] = k;
    }
    let mut edges = vec![Vec::new(); n];
    for k in 0..n {
        let rank = order[k];
        if rank == 0 {
            continue;
        }
        let mut inputs: Vec<usize> = picks[k].iter().map(|p| by_rank[p % rank]).collect();
        inputs.sort_unstable();
        inputs.dedup();
        edges[k] = inputs;
    }
    let mut rebuilt = Graph::new(SR, 64, 120.0).unwrap();
    let mut added = vec![false; n];
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        remaining.retain(|&k| {
            if edges[k].iter().all(|&i| added[i]) {
                let names: Vec<String> = edges[k].iter().map(|i| format!("n{i}")).collect();
                let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                if refs.is_empty() {
                    rebuilt
                        .add_node(
                            &format!("n{k}"),
                            Oscillator::new(),
                            &[],
                            &[("freq_hz", 100.0 + k as f64)],
                        )
                        .unwrap();
                } else {
                    rebuilt.add_node(&format!("n{k}"), Add::new(), &refs, &[]).unwrap();
                }
                added[k] = true;
                false
            } else {
                true
            }
        });
    }
    rebuilt
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn schedule_respects_every_edge(
        (order, picks) in (1usize..200).prop_flat_map(|n| (
            Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            proptest::collection::vec(proptest::collection::vec(any::<usize>(), 0..4), n),
        ))
    ) {
        let g = build_dag(&order, &picks);
        let schedule = g.compile().unwrap();
        prop_assert_eq!(schedule.len(), g.len());
        let mut pos = vec![usize::MAX; g.len()];
        for (p, id) in schedule.iter().enumerate() {
            prop_assert_eq!(pos[id.0], usize::MAX);
            pos[id.0] = p;
        }
        for (i, node) in g.nodes().iter().enumerate() {
            for &input in node.input_ids() {
                prop_assert!(pos[input] < pos[i]);
            }
        }
    }

    #[test]
    fn rewiring_into_a_loop_is_a_cycle(len in 2usize..30) {
        let mut g = Graph::new(SR, 64, 120.0).unwrap();
        g.add_node("src", Oscillator::new(), &[], &[]).unwrap();
        g.add_node("n0", Gain::new(), &["src"], &[]).unwrap();
        for i in 1..len {
            g.add_node(&format!("n{i}"), Gain::new(), &[&format!("n{}", i - 1)], &[]).unwrap();
        }
        g.set_inputs("n0", &[&format!("n{}", len - 1)]).unwrap();
        match g.compile() {
            Err(GraphError::CycleDetected(path)) => {
                let mut names = path.clone();
                names.sort();
                let mut expected: Vec<String> = (0..len).map(|i| format!("n{i}")).collect();
                expected.sort();
                prop_assert_eq!(names, expected);
            }
            other => prop_assert!(false, "expected a cycle, got {:?}", other.map(|o| o.len())),
        }
    }

    #[test]
    fn bus_equals_sum_of_stems(
        freqs in proptest::collection::vec(20.0f64..5000.0, 1..8),
        gains in proptest::collection::vec(0.0f64..4.0, 8),
        block in 1usize..2048,
    ) {
        let mut g = Graph::new(SR, block, 120.0).unwrap();
        let mut names = Vec::new();
        for (i, f) in freqs.iter().enumerate() {
            let name = format!("s{i}");
            g.add_node(&name, Oscillator::new(), &[], &[("freq_hz", *f)]).unwrap();
            g.set_record(&name, true).unwrap();
            names.push(name);
        }
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        g.add_node("bus", Add::new(), &refs, &[]).unwrap();
        for (i, gain) in gains.iter().take(freqs.len()).enumerate() {
            g.set_parameter("bus", &format!("gain_{i}"), *gain).unwrap();
        }
        g.set_record("bus", true).unwrap();
        let out = g.render(0.05).unwrap();
        let bus = out.get("bus").unwrap().channel(0);
        for (n, b) in bus.iter().enumerate() {
            let sum: f64 = names.iter().zip(&gains).map(|(s, g)| g * out.get(s).unwrap().channel(0)[n]).sum();
            prop_assert!((b - sum).abs() < 1e-6);
        }
    }

    #[test]
    fn automation_is_clamped_per_frame(values in proptest::collection::vec(-10.0f64..30.0, 1..64)) {
        let mut auto = Graph::new(SR, 16, 120.0).unwrap();
        auto.add_node("src", Oscillator::new(), &[], &[("freq_hz", 0.0), ("phase", 0.25)]).unwrap();
        auto.add_node("g", Gain::new(), &["src"], &[]).unwrap();
        auto.set_record("g", true).unwrap();
        auto.set_automation("g", "gain", ControlSignal::new(values.clone(), false).unwrap()).unwrap();
        let out = auto.render_frames(100).unwrap();
        let y = out.get("g").unwrap().channel(0);
        for (n, v) in y.iter().enumerate() {
            // Past the end of a non-held signal the scalar value applies.
            let expected = values.get(n).map_or(1.0, |v| v.clamp(0.0, 16.0));
            prop_assert_eq!(*v, expected);
        }
    }
}

#[test]
fn insertion_order_breaks_ties() {
    let mut g = Graph::new(SR, 64, 120.0).unwrap();
    for name in ["c", "a", "b"] {
        g.add_node(name, Oscillator::new(), &[], &[]).unwrap();
    }
    g.add_node("mix", Add::new(), &["b", "a"], &[]).unwrap();
    let order: Vec<&str> = g.compile().unwrap().into_iter().map(|id| g.node_name(id)).collect();
    assert_eq!(order, ["c", "a", "b", "mix"]);
}

#[test]
fn graph_rerenders_identically() {
    let mut g = all_kinds_graph(300);
    let first = g.render(0.3).unwrap();
    g.set_parameter("g", "gain", 0.1).unwrap();
    g.render(0.1).unwrap();
    g.set_parameter("g", "gain", 0.7).unwrap();
    let again = g.render(0.3).unwrap();
    for (name, buf) in first.iter() {
        let other = again.get(name).unwrap();
        for ch in 0..buf.num_channels() {
            assert_eq!(bits(buf.channel(ch)), bits(other.channel(ch)), "{name}");
        }
    }
}

#[test]
fn validation_errors() {
    let mut g = Graph::new(SR, 64, 120.0).unwrap();
    assert_eq!(g.compile().unwrap_err(), GraphError::EmptyGraph);
    g.add_node("osc", Oscillator::new(), &[], &[]).unwrap();
    assert!(matches!(
        g.add_node("osc", Gain::new(), &[], &[]),
        Err(GraphError::DuplicateName(_))
    ));
    assert!(matches!(
        g.add_node("g", Gain::new(), &["nope"], &[]),
        Err(GraphError::UnknownInput { .. })
    ));
    assert!(matches!(
        g.add_node("g", Gain::new(), &[], &[]),
        Err(GraphError::NoInputs(_))
    ));
    assert!(matches!(
        g.add_node("f", Biquad::new(), &["osc", "osc"], &[]),
        Err(GraphError::ArityMismatch { .. })
    ));
    assert!(matches!(
        g.add_node("g", Gain::new(), &["osc"], &[("volume", 1.0)]),
        Err(GraphError::UnknownParameter { .. })
    ));
    assert!(matches!(
        g.set_parameter("osc", "gain", 17.0),
        Err(GraphError::OutOfRange { .. })
    ));
    assert!(matches!(
        g.set_parameter("osc", "gain", f64::NAN),
        Err(GraphError::OutOfRange { .. })
    ));
    assert!(matches!(
        g.set_automation("osc", "phase", ControlSignal::constant(0.5, 4)),
        Err(GraphError::NotAutomatable { .. })
    ));
    assert!(matches!(
        g.load_note_sequence("osc", &demo_notes(), false),
        Err(GraphError::NotAnInstrument(_))
    ));
    assert!(matches!(g.set_record("ghost", true), Err(GraphError::UnknownNode(_))));
    let other_rate = AudioBuffer::from_mono(vec![0.0; 10], 48_000.0).unwrap();
    assert!(matches!(
        g.add_node("p", Playback::new(other_rate.clone()), &[], &[]),
        Err(GraphError::RateMismatch { .. })
    ));
    assert!(matches!(
        g.add_node("s", Sampler::new(other_rate), &[], &[]),
        Err(GraphError::RateMismatch { .. })
    ));
    for d in [0.0, -1.0, f64::NAN, f64::INFINITY] {
        assert!(matches!(g.render(d), Err(GraphError::InvalidDuration(_))));
    }
    assert!(Graph::new(0.0, 64, 120.0).is_err());
    assert!(Graph::new(SR, 0, 120.0).is_err());
    assert!(Graph::new(SR, 64, -1.0).is_err());
    // A failed call leaves the graph usable.
    g.set_record("osc", true).unwrap();
    assert_eq!(g.render(0.01).unwrap().len(), 1);
}

#[test]
fn only_recorded_nodes_are_returned() {
    let mut g = all_kinds_graph(64);
    for n in [
        "osc",
        "lfo",
        "play",
        "warp",
        "smp",
        "wt",
        "filt",
        "hp",
        "g",
        "comp",
        "self_comp",
    ] {
        g.set_record(n, false).unwrap();
    }
    let out = g.render(0.05).unwrap();
    assert_eq!(out.names().collect::<Vec<_>>(), ["bus"]);
    assert_eq!(out.get("bus").unwrap().frames(), g.frames_for(0.05).unwrap());
}
