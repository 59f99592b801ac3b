use std::ffi::{CStr, CString};
use std::ptr;

use dawkit_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(daw_last_error()) }
        .to_string_lossy()
        .into_owned()
}

struct Handle(*mut DawGraph);

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { daw_graph_free(self.0) }
    }
}

fn graph(block: usize) -> Handle {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { daw_graph_new(44_100.0, block, 120.0, &mut g) }, DawStatus::Ok);
    Handle(g)
}

unsafe fn add(g: &Handle, kind: &str, name: &str, inputs: &[&str]) -> DawStatus {
    let owned: Vec<CString> = inputs.iter().map(|s| c(s)).collect();
    let ptrs: Vec<*const std::ffi::c_char> = owned.iter().map(|s| s.as_ptr()).collect();
    daw_graph_add_node(g.0, c(kind).as_ptr(), c(name).as_ptr(), ptrs.as_ptr(), ptrs.len())
}

unsafe fn render(g: &Handle, seconds: f64) -> Vec<(String, Vec<Vec<f64>>)> {
    let mut r = ptr::null_mut();
    assert_eq!(
        daw_graph_render(g.0, seconds, &mut r),
        DawStatus::Ok,
        "{}",
        last_error()
    );
    let mut out = Vec::new();
    for i in 0..daw_result_count(r) {
        let name = CStr::from_ptr(daw_result_name(r, i)).to_string_lossy().into_owned();
        let (mut ch, mut fr) = (0, 0);
        assert_eq!(daw_result_shape(r, i, &mut ch, &mut fr), DawStatus::Ok);
        let mut channels = Vec::new();
        for k in 0..ch {
            let mut dst = vec![0.0; fr];
            assert_eq!(daw_result_copy_channel(r, i, k, dst.as_mut_ptr(), fr), DawStatus::Ok);
            channels.push(dst);
        }
        out.push((name, channels));
    }
    daw_result_free(r);
    out
}

#[test]
fn build_render_and_copy_out() {
    let g = graph(64);
    unsafe {
        assert_eq!(add(&g, "oscillator", "osc", &[]), DawStatus::Ok);
        assert_eq!(
            daw_graph_set_param(g.0, c("osc").as_ptr(), c("freq_hz").as_ptr(), 0.0),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_set_param(g.0, c("osc").as_ptr(), c("phase").as_ptr(), 0.25),
            DawStatus::Ok
        );
        assert_eq!(add(&g, "gain", "g", &["osc"]), DawStatus::Ok);
        let ramp: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        assert_eq!(
            daw_graph_set_automation(
                g.0,
                c("g").as_ptr(),
                c("gain").as_ptr(),
                ramp.as_ptr(),
                ramp.len(),
                true
            ),
            DawStatus::Ok
        );
        assert_eq!(daw_graph_set_record(g.0, c("g").as_ptr(), true), DawStatus::Ok);
        assert_eq!(daw_graph_set_record(g.0, c("osc").as_ptr(), true), DawStatus::Ok);
        let out = render(&g, 200.0 / 44_100.0);
        let names: Vec<&str> = out.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["g", "osc"]);
        let y = &out[0].1[0];
        assert_eq!(y.len(), 200);
        for (n, v) in y.iter().enumerate() {
            assert!((v - ramp[n.min(99)]).abs() < 1e-12, "{n}: {v}");
        }
    }
}

#[test]
fn instruments_and_warped_clips() {
    let g = graph(128);
    let table: Vec<f64> = (0..64)
        .map(|i| (std::f64::consts::TAU * i as f64 / 64.0).sin())
        .collect();
    let audio: Vec<f64> = (0..44_100).map(|i| (i as f64 * 0.05).sin()).collect();
    let channels = [audio.as_ptr()];
    let notes = [DawNote {
        note: 69,
        velocity: 100,
        start: 0.0,
        duration: 0.5,
    }];
    let clip = DawClip {
        source_bpm: 120.0,
        start_marker: 0.0,
        end_marker: 2.0,
        loop_start: 0.0,
        loop_end: 2.0,
        loop_on: false,
        warp_on: true,
        at_beats: 0.0,
        transpose_semitones: 0.0,
    };
    let markers = [
        DawWarpMarker {
            seconds: 0.0,
            beats: 0.0,
        },
        DawWarpMarker {
            seconds: 1.0,
            beats: 2.0,
        },
    ];
    unsafe {
        assert_eq!(
            daw_graph_add_wavetable(g.0, c("wt").as_ptr(), table.as_ptr(), table.len()),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_load_notes(g.0, c("wt").as_ptr(), notes.as_ptr(), 1, true),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_add_sampler(g.0, c("smp").as_ptr(), channels.as_ptr(), 1, audio.len(), 44_100.0),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_add_playback(g.0, c("play").as_ptr(), channels.as_ptr(), 1, audio.len(), 44_100.0),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_add_playback_warp(
                g.0,
                c("warp").as_ptr(),
                channels.as_ptr(),
                1,
                audio.len(),
                44_100.0,
                markers.as_ptr(),
                2,
                &clip
            ),
            DawStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(add(&g, "add", "bus", &["wt", "smp", "play", "warp"]), DawStatus::Ok);
        assert_eq!(daw_graph_set_record(g.0, c("bus").as_ptr(), true), DawStatus::Ok);
        assert_eq!(daw_graph_set_record(g.0, c("wt").as_ptr(), true), DawStatus::Ok);
        let out = render(&g, 0.5);
        let wt = &out.iter().find(|(n, _)| n == "wt").unwrap().1[0];
        // Beats mode at 120 bpm: the note fills the first 0.25 s, then releases.
        assert!(wt[..10_000].iter().any(|v| v.abs() > 0.5));
        assert!(wt[15_000..].iter().all(|v| *v == 0.0));

        assert_eq!(
            daw_graph_load_notes(g.0, c("play").as_ptr(), notes.as_ptr(), 1, false),
            DawStatus::NotAnInstrument
        );
        assert_eq!(
            daw_graph_add_wavetable(g.0, c("tiny").as_ptr(), table.as_ptr(), 3),
            DawStatus::InvalidArgument
        );
        let bad = [
            DawWarpMarker {
                seconds: 1.0,
                beats: 0.0,
            },
            DawWarpMarker {
                seconds: 0.5,
                beats: 1.0,
            },
        ];
        assert_eq!(
            daw_graph_add_playback_warp(
                g.0,
                c("w2").as_ptr(),
                channels.as_ptr(),
                1,
                audio.len(),
                44_100.0,
                bad.as_ptr(),
                2,
                &clip
            ),
            DawStatus::InvalidArgument
        );
        assert!(last_error().contains("marker 1"), "{}", last_error());
    }
}

#[test]
fn smf_bytes_load_into_instruments() {
    // One track: tpq 96, note 60 for one beat.
    let mut smf = b"MThd\0\0\0\x06\0\0\0\x01\0\x60MTrk".to_vec();
    let track = [0x00, 0x90, 60, 100, 0x60, 0x80, 60, 0, 0x00, 0xff, 0x2f, 0x00];
    smf.extend_from_slice(&(track.len() as u32).to_be_bytes());
    smf.extend_from_slice(&track);
    let g = graph(64);
    let table = [0.0, 1.0, 0.0, -1.0];
    unsafe {
        assert_eq!(
            daw_graph_add_wavetable(g.0, c("wt").as_ptr(), table.as_ptr(), 4),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_load_smf(g.0, c("wt").as_ptr(), smf.as_ptr(), smf.len(), false),
            DawStatus::Ok
        );
        assert_eq!(
            daw_graph_load_smf(g.0, c("wt").as_ptr(), smf.as_ptr(), 10, false),
            DawStatus::ParseError
        );
        assert_eq!(daw_graph_set_record(g.0, c("wt").as_ptr(), true), DawStatus::Ok);
        let y = &render(&g, 1.0)[0].1[0];
        assert!(y[..20_000].iter().any(|v| v.abs() > 0.1));
        assert!(y[30_000..].iter().all(|v| *v == 0.0));
    }
}

#[test]
fn graph_errors_map_to_status_codes() {
    let g = graph(64);
    unsafe {
        assert_eq!(add(&g, "oscillator", "osc", &[]), DawStatus::Ok);
        assert_eq!(add(&g, "oscillator", "osc", &[]), DawStatus::DuplicateName);
        assert!(last_error().contains("osc"));
        assert_eq!(add(&g, "gain", "g", &["ghost"]), DawStatus::UnknownInput);
        assert_eq!(add(&g, "biquad", "f", &["osc", "osc"]), DawStatus::ArityMismatch);
        assert_eq!(add(&g, "reverb", "r", &["osc"]), DawStatus::UnknownKind);
        assert_eq!(add(&g, "sampler", "s", &[]), DawStatus::UnknownKind);
        assert_eq!(
            daw_graph_set_param(g.0, c("osc").as_ptr(), c("volume").as_ptr(), 1.0),
            DawStatus::UnknownParameter
        );
        assert_eq!(
            daw_graph_set_param(g.0, c("osc").as_ptr(), c("gain").as_ptr(), 1e9),
            DawStatus::OutOfRange
        );
        assert_eq!(
            daw_graph_set_param(g.0, c("nope").as_ptr(), c("gain").as_ptr(), 1.0),
            DawStatus::UnknownNode
        );
        let v = [0.5];
        assert_eq!(
            daw_graph_set_automation(g.0, c("osc").as_ptr(), c("phase").as_ptr(), v.as_ptr(), 1, true),
            DawStatus::NotAutomatable
        );
        assert_eq!(
            daw_graph_set_automation(g.0, c("osc").as_ptr(), c("gain").as_ptr(), v.as_ptr(), 0, true),
            DawStatus::InvalidArgument
        );
        let mut r = ptr::null_mut();
        assert_eq!(daw_graph_render(g.0, -1.0, &mut r), DawStatus::InvalidDuration);
        assert!(r.is_null());
        let other = [0.0f64; 8];
        let ch = [other.as_ptr()];
        assert_eq!(
            daw_graph_add_playback(g.0, c("p").as_ptr(), ch.as_ptr(), 1, 8, 48_000.0),
            DawStatus::RateMismatch
        );
        // Errors leave the graph usable.
        assert_eq!(add(&g, "gain", "g", &["osc"]), DawStatus::Ok);
    }
    let empty = graph(64);
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(daw_graph_render(empty.0, 1.0, &mut r), DawStatus::EmptyGraph);
    }
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { daw_graph_new(0.0, 64, 120.0, &mut g) },
        DawStatus::InvalidArgument
    );
    assert!(g.is_null());
}

#[test]
fn null_and_bad_arguments_are_rejected() {
    let g = graph(64);
    unsafe {
        assert_eq!(
            daw_graph_new(44_100.0, 64, 120.0, ptr::null_mut()),
            DawStatus::NullArgument
        );
        assert_eq!(
            daw_graph_set_param(ptr::null_mut(), c("a").as_ptr(), c("b").as_ptr(), 1.0),
            DawStatus::NullArgument
        );
        assert_eq!(
            daw_graph_add_node(g.0, ptr::null(), c("x").as_ptr(), ptr::null(), 0),
            DawStatus::NullArgument
        );
        assert_eq!(
            daw_graph_add_node(g.0, c("gain").as_ptr(), c("x").as_ptr(), ptr::null(), 2),
            DawStatus::NullArgument
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            daw_graph_add_node(g.0, bad.as_ptr().cast(), c("x").as_ptr(), ptr::null(), 0),
            DawStatus::InvalidUtf8
        );
        assert_eq!(daw_graph_render(g.0, 1.0, ptr::null_mut()), DawStatus::NullArgument);
        assert_eq!(daw_result_count(ptr::null()), 0);
        assert!(daw_result_name(ptr::null(), 0).is_null());
        daw_graph_free(ptr::null_mut());
        daw_result_free(ptr::null_mut());

        assert_eq!(add(&g, "oscillator", "osc", &[]), DawStatus::Ok);
        assert_eq!(daw_graph_set_record(g.0, c("osc").as_ptr(), true), DawStatus::Ok);
        let mut r = ptr::null_mut();
        assert_eq!(daw_graph_render(g.0, 0.01, &mut r), DawStatus::Ok);
        let mut small = [0.0; 4];
        assert_eq!(
            daw_result_copy_channel(r, 0, 0, small.as_mut_ptr(), 4),
            DawStatus::BufferTooSmall
        );
        assert!(last_error().contains("441"), "{}", last_error());
        assert_eq!(
            daw_result_copy_channel(r, 0, 1, small.as_mut_ptr(), 4),
            DawStatus::InvalidArgument
        );
        assert_eq!(
            daw_result_copy_channel(r, 3, 0, small.as_mut_ptr(), 4),
            DawStatus::InvalidArgument
        );
        assert!(daw_result_name(r, 3).is_null());
        assert_eq!(
            daw_result_shape(r, 0, ptr::null_mut(), ptr::null_mut()),
            DawStatus::NullArgument
        );
        daw_result_free(r);
    }
}

#[test]
fn project_files_load_through_the_abi() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    std::fs::write(
        &path,
        r#"{"duration_seconds": 0.1, "nodes": [{"name": "o", "kind": "oscillator", "record": true}]}"#,
    )
    .unwrap();
    let (mut g, mut dur) = (ptr::null_mut(), 0.0);
    unsafe {
        assert_eq!(
            daw_project_load(c(path.to_str().unwrap()).as_ptr(), &mut g, &mut dur),
            DawStatus::Ok
        );
        let h = Handle(g);
        assert_eq!(dur, 0.1);
        assert_eq!(render(&h, dur)[0].1[0].len(), 4410);

        std::fs::write(&path, "{").unwrap();
        assert_eq!(
            daw_project_load(c(path.to_str().unwrap()).as_ptr(), &mut g, &mut dur),
            DawStatus::ParseError
        );
        std::fs::write(
            &path,
            r#"{"duration_seconds": 1, "nodes": [{"name": "o", "kind": "zz"}]}"#,
        )
        .unwrap();
        assert_eq!(
            daw_project_load(c(path.to_str().unwrap()).as_ptr(), &mut g, &mut dur),
            DawStatus::ValidationError
        );
        assert!(last_error().contains("zz"));
        let missing = dir.path().join("none.json");
        assert_eq!(
            daw_project_load(c(missing.to_str().unwrap()).as_ptr(), &mut g, &mut dur),
            DawStatus::IoError
        );
    }
}

#[test]
fn pairing_metrics() {
    let mut d = 0u8;
    let mut dist = 0.0;
    unsafe {
        assert_eq!(
            daw_key_circle_distance(c("Cmaj").as_ptr(), c("F#maj").as_ptr(), &mut d),
            DawStatus::Ok
        );
        assert_eq!(d, 6);
        assert_eq!(
            daw_key_circle_distance(c("Amin").as_ptr(), c("Cmaj").as_ptr(), &mut d),
            DawStatus::Ok
        );
        assert_eq!(d, 0);
        assert_eq!(
            daw_key_circle_distance(c("X").as_ptr(), c("Cmaj").as_ptr(), &mut d),
            DawStatus::InvalidArgument
        );
        assert_eq!(
            daw_pair_distance(120.0, c("Gmaj").as_ptr(), 60.0, c("Gmaj").as_ptr(), 1.0, 1.0, &mut dist),
            DawStatus::Ok
        );
        assert_eq!(dist, 0.0);
        assert_eq!(
            daw_pair_distance(0.0, c("Gmaj").as_ptr(), 60.0, c("Gmaj").as_ptr(), 1.0, 1.0, &mut dist),
            DawStatus::InvalidArgument
        );
    }
}
