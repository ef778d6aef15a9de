use std::ffi::{c_char, CString};
use std::ptr;

use crowd_sweep_ffi::*;

const SECTION3: &str = r#"{"horizon": 6.0,
  "agents": [{"radius": 3.0, "speed": 8.0, "target": [0, 0], "start": [0, 48]}],
  "obstacles": [{"center": [0, 24], "radius": 3.0}]}"#;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { cs_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

fn scenario(json: &str) -> (i32, *mut CsScenario) {
    let text = CString::new(json).unwrap();
    let mut sc = ptr::null_mut();
    let rc = unsafe { cs_scenario_from_json(text.as_ptr(), &mut sc) };
    (rc, sc)
}

#[test]
fn scenario_lifecycle() {
    let (rc, sc) = scenario(SECTION3);
    assert_eq!(rc, CS_OK);
    unsafe {
        assert_eq!(cs_scenario_agent_count(sc), 1);
        assert_eq!(cs_scenario_obstacle_count(sc), 1);
        cs_scenario_free(sc);
        cs_scenario_free(ptr::null_mut());
    }
}

#[test]
fn scenario_errors() {
    let (rc, sc) = scenario("{not json");
    assert_eq!(rc, CS_ERR_PARSE);
    assert!(sc.is_null());
    assert!(last_error().contains("malformed"));

    let (rc, sc) = scenario(&SECTION3.replace("[0, 48]", "[0, 25]"));
    assert_eq!(rc, CS_ERR_VALIDATION);
    assert!(sc.is_null());
    assert!(
        last_error().contains("agent 0 / obstacle 0"),
        "{}",
        last_error()
    );

    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { cs_scenario_from_json(ptr::null(), &mut out) },
        CS_ERR_NULL_POINTER
    );
}

#[test]
fn simulate_and_read_back() {
    let (_, sc) = scenario(SECTION3);
    let mut traj = ptr::null_mut();
    unsafe {
        assert_eq!(
            cs_simulate(sc, 1e-2, 1.0, CS_SCHEME_VELOCITY, CS_SIDE_LEFT, &mut traj),
            CS_OK
        );
        assert_eq!(cs_trajectory_node_count(traj), 601);
        assert_eq!(cs_trajectory_dimension(traj), 2);
        assert_eq!(cs_trajectory_pair_count(traj), 1);

        let mut t = 0.0;
        let mut x = [0.0; 2];
        assert_eq!(
            cs_trajectory_state(traj, 0, &mut t, x.as_mut_ptr(), 2),
            CS_OK
        );
        assert_eq!((t, x), (0.0, [0.0, 48.0]));
        assert_eq!(
            cs_trajectory_state(traj, 100, &mut t, x.as_mut_ptr(), 2),
            CS_OK
        );
        assert!((t - 1.0).abs() < 1e-12);
        assert!((x[1] - 40.0).abs() < 1e-9);

        assert_eq!(
            cs_trajectory_state(traj, 0, &mut t, x.as_mut_ptr(), 1),
            CS_ERR_BUFFER_TOO_SMALL
        );
        assert_eq!(
            cs_trajectory_state(traj, 601, &mut t, x.as_mut_ptr(), 2),
            CS_ERR_INVALID_ARGUMENT
        );

        let mut eta_max: f64 = 0.0;
        let mut eta = [0.0];
        for k in 0..600 {
            assert_eq!(
                cs_trajectory_multipliers(traj, k, eta.as_mut_ptr(), 1),
                CS_OK
            );
            eta_max = eta_max.max(eta[0]);
        }
        assert!(eta_max > 0.0);

        assert_eq!(
            cs_simulate(sc, 1e-2, 1.0, 7, CS_SIDE_LEFT, &mut traj as *mut _),
            CS_ERR_INVALID_ARGUMENT
        );
        cs_trajectory_free(traj);
        cs_scenario_free(sc);
    }
}

#[test]
fn analytic_and_sweep() {
    let (_, sc) = scenario(SECTION3);
    let mut r = CsObstacleRun::default();
    unsafe {
        assert_eq!(
            cs_analytic_optimize(sc, 1.0, CS_MODE_PAPER, CS_SIDE_LEFT, &mut r),
            CS_OK
        );
    }
    assert!((r.a_bar - 2.8004).abs() < 2e-3);
    assert!((r.cost - 23.5871).abs() < 0.01);
    assert!((r.theta_deg - 104.4775).abs() < 1e-3);
    assert!(r.release_x < 0.0);

    let taus = [1.0, 2.0, 3.0];
    let mut rows = [CsSweepRow::default(); 3];
    unsafe {
        assert_eq!(
            cs_sweep(
                sc,
                taus.as_ptr(),
                3,
                CS_MODE_PAPER,
                CS_SIDE_LEFT,
                rows.as_mut_ptr()
            ),
            CS_OK
        );
    }
    assert_eq!(rows.map(|r| r.tau), taus);
    assert!((rows[0].a_bar - r.a_bar).abs() < 1e-12);
    assert!(rows[2].a_bar < rows[1].a_bar && rows[1].a_bar < rows[0].a_bar);

    unsafe {
        assert_eq!(
            cs_analytic_optimize(sc, -1.0, CS_MODE_PAPER, CS_SIDE_LEFT, &mut r),
            CS_ERR_INVALID_ARGUMENT
        );
        cs_scenario_free(sc);
    }
}

#[test]
fn velocity_projection() {
    let u = [-1.0, 2.0];
    let g = [1.0, 0.0, 0.0, 1.0];
    let mut v = [0.0; 2];
    let mut eta = [0.0; 2];
    let rc = unsafe {
        cs_project_velocity(
            u.as_ptr(),
            2,
            g.as_ptr(),
            ptr::null(),
            2,
            v.as_mut_ptr(),
            eta.as_mut_ptr(),
        )
    };
    assert_eq!(rc, CS_OK);
    assert_eq!(v, [0.0, 2.0]);
    assert_eq!(eta, [1.0, 0.0]);

    let b = [0.5, 0.0];
    let rc = unsafe {
        cs_project_velocity(
            u.as_ptr(),
            2,
            g.as_ptr(),
            b.as_ptr(),
            2,
            v.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(rc, CS_OK);
    assert!((v[0] + 0.5).abs() < 1e-12 && v[1] == 2.0);

    let rc = unsafe {
        cs_project_velocity(
            u.as_ptr(),
            2,
            ptr::null(),
            ptr::null(),
            0,
            v.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(rc, CS_OK);
    assert_eq!(v, u);

    let rc = unsafe {
        cs_project_velocity(
            u.as_ptr(),
            0,
            g.as_ptr(),
            ptr::null(),
            2,
            v.as_mut_ptr(),
            ptr::null_mut(),
        )
    };
    assert_eq!(rc, CS_ERR_INVALID_ARGUMENT);
}
