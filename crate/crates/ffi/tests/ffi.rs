use std::ffi::{CStr, CString};
use std::ptr;

use apf_ddpg_ffi::*;

fn last_error() -> String {
    let p = apf_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn environment_lifecycle() {
    unsafe {
        let mut env = ptr::null_mut();
        assert_eq!(apf_env_new(ptr::null(), &mut env), ApfStatus::Ok);
        let mut state = [0.0; 6];
        assert_eq!(apf_env_reset(env, state.as_mut_ptr()), ApfStatus::Ok);
        // start pose: arm stretched along +x
        assert!((state[0] - 0.89).abs() < 1e-12);

        let mut reward = 0.0;
        let mut terminal = ApfTerminal::None;
        let mut steps = 0;
        while terminal == ApfTerminal::None {
            let action = [0.0, 0.0, 0.0];
            let status = apf_env_step(env, action.as_ptr(), state.as_mut_ptr(), &mut reward, &mut terminal);
            assert_eq!(status, ApfStatus::Ok);
            assert_eq!(reward, -1.0);
            steps += 1;
        }
        assert_eq!((steps, terminal), (100, ApfTerminal::Timeout));

        let action = [0.0; 3];
        let status = apf_env_step(env, action.as_ptr(), state.as_mut_ptr(), &mut reward, &mut terminal);
        assert_eq!(status, ApfStatus::EpisodeOver);
        assert!(last_error().contains("episode"));
        apf_env_free(env);
    }
}

#[test]
fn config_json_and_errors() {
    unsafe {
        let mut env = ptr::null_mut();
        let json = CString::new(r#"{"max_steps": 3}"#).unwrap();
        assert_eq!(apf_env_new(json.as_ptr(), &mut env), ApfStatus::Ok);
        let mut state = [0.0; 6];
        apf_env_reset(env, state.as_mut_ptr());
        let (mut reward, mut terminal) = (0.0, ApfTerminal::None);
        for _ in 0..3 {
            let a = [0.0; 3];
            apf_env_step(env, a.as_ptr(), state.as_mut_ptr(), &mut reward, &mut terminal);
        }
        assert_eq!(terminal, ApfTerminal::Timeout);

        let nan = [f64::NAN, 0.0, 0.0];
        apf_env_reset(env, state.as_mut_ptr());
        let status = apf_env_step(env, nan.as_ptr(), state.as_mut_ptr(), &mut reward, &mut terminal);
        assert_eq!(status, ApfStatus::NonFinite);
        apf_env_free(env);

        let bad = CString::new(r#"{"max_steps": "many"}"#).unwrap();
        let mut other = ptr::null_mut();
        assert_eq!(apf_env_new(bad.as_ptr(), &mut other), ApfStatus::InvalidArgument);
        assert!(other.is_null());
        assert_eq!(apf_env_new(ptr::null(), ptr::null_mut()), ApfStatus::NullPointer);
        assert_eq!(apf_env_reset(ptr::null_mut(), state.as_mut_ptr()), ApfStatus::NullPointer);
        apf_env_free(ptr::null_mut());
    }
}

#[test]
fn scalar_helpers() {
    assert_eq!(apf_env_reward(0.1, false, 100), -0.5);
    assert_eq!(apf_env_reward(0.05, true, 100), -100.0);
    unsafe {
        let mut cell = [0i32; 3];
        let tip = [0.234, -0.051, 0.399];
        assert_eq!(apf_map_state(tip.as_ptr(), 0.1, cell.as_mut_ptr()), ApfStatus::Ok);
        assert_eq!(cell, [2, -1, 3]);
        assert_eq!(apf_map_state(tip.as_ptr(), 0.0, cell.as_mut_ptr()), ApfStatus::InvalidArgument);

        let mut t = 0.0;
        assert_eq!(apf_target(3, 1, &mut t), ApfStatus::Ok);
        assert_eq!(t, 0.5);
        assert_eq!(apf_target(0, 0, &mut t), ApfStatus::InvalidArgument);
    }
}

#[test]
fn experiment_and_saved_networks() {
    let tmp = tempfile::tempdir().unwrap();
    let json = CString::new(
        r#"{"episodes": 2, "runs": 1, "max_steps": 10, "actor_hidden": [8], "critic_hidden": [8],
            "apf_hidden": [4], "batch_size": 4, "trajectory_capacity": 10}"#,
    )
    .unwrap();
    let dir = CString::new(tmp.path().to_str().unwrap()).unwrap();
    unsafe {
        assert_eq!(apf_run_experiment(json.as_ptr(), dir.as_ptr()), ApfStatus::Ok);
    }
    let csv = std::fs::read_to_string(tmp.path().join("apf-ddpg_episodes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);

    unsafe {
        let path = CString::new(tmp.path().join("apf-ddpg_run00_actor.net").to_str().unwrap()).unwrap();
        let mut actor = ptr::null_mut();
        assert_eq!(apf_net_load(path.as_ptr(), &mut actor), ApfStatus::Ok);
        assert_eq!((apf_net_input_size(actor), apf_net_output_size(actor)), (6, 3));
        let x = [0.89, 0.0, 0.0, 0.0, 0.0, 0.0];
        let mut y = [0.0; 3];
        assert_eq!(apf_net_forward(actor, x.as_ptr(), 6, y.as_mut_ptr(), 3), ApfStatus::Ok);
        assert!(y.iter().all(|v| v.abs() <= std::f64::consts::PI / 16.0));
        assert_eq!(apf_net_forward(actor, x.as_ptr(), 5, y.as_mut_ptr(), 3), ApfStatus::InvalidArgument);
        let mut f = 0.0;
        let status = apf_shaping_reward(actor, x.as_ptr(), x.as_ptr(), 0.99, true, 0.1, &mut f);
        assert_eq!(status, ApfStatus::InvalidArgument);
        apf_net_free(actor);

        let path = CString::new(tmp.path().join("apf-ddpg_run00_apf.net").to_str().unwrap()).unwrap();
        let mut phi = ptr::null_mut();
        assert_eq!(apf_net_load(path.as_ptr(), &mut phi), ApfStatus::Ok);
        let s2 = [0.5, 0.2, 0.1, 0.3, 0.2, 0.1];
        let (mut f, mut g) = (0.0, 0.0);
        assert_eq!(apf_shaping_reward(phi, x.as_ptr(), x.as_ptr(), 0.5, false, 0.1, &mut f), ApfStatus::Ok);
        assert_eq!(f, 0.0);
        assert_eq!(apf_shaping_reward(phi, x.as_ptr(), s2.as_ptr(), 0.5, true, 0.1, &mut g), ApfStatus::Ok);
        assert!(g.is_finite());
        apf_net_free(phi);

        let missing = CString::new(tmp.path().join("nope.net").to_str().unwrap()).unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(apf_net_load(missing.as_ptr(), &mut none), ApfStatus::Io);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn header_is_generated() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/apf_ddpg.h")).unwrap();
    for name in ["apf_env_new", "apf_env_step", "apf_net_forward", "apf_run_experiment", "APF_STATUS_OK"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
