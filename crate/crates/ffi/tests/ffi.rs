use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use netforge_ffi::*;

/// Triangle with sources (1, −1, 0) and unit lengths.
fn triangle() -> *mut NfNetwork {
    let (u, v) = ([0usize, 0, 1], [1usize, 2, 2]);
    let s = [1.0, -1.0, 0.0];
    let mut net = ptr::null_mut();
    let st = unsafe { nf_network_new(3, u.as_ptr(), v.as_ptr(), ptr::null(), 3, s.as_ptr(), &mut net) };
    assert_eq!(st, NfStatus::Ok);
    assert!(!net.is_null());
    net
}

fn last_error() -> String {
    let p = nf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn builds_and_reports_counts() {
    let net = triangle();
    unsafe {
        assert_eq!(nf_network_vertex_count(net), 3);
        assert_eq!(nf_network_edge_count(net), 3);
        nf_network_free(net);
        nf_network_free(ptr::null_mut());
        assert_eq!(nf_network_edge_count(ptr::null()), 0);
    }
}

#[test]
fn invalid_networks_are_rejected_with_a_message() {
    let (u, v) = ([0usize], [1usize]);
    let s = [1.0, 0.0];
    let mut net = ptr::null_mut();
    let st = unsafe { nf_network_new(2, u.as_ptr(), v.as_ptr(), ptr::null(), 1, s.as_ptr(), &mut net) };
    assert_eq!(st, NfStatus::InvalidNetwork);
    assert!(net.is_null());
    assert!(last_error().contains("sum to zero"));

    let st = unsafe { nf_network_new(2, ptr::null(), v.as_ptr(), ptr::null(), 1, s.as_ptr(), &mut net) };
    assert_eq!(st, NfStatus::NullPointer);

    let bad = CString::new("{not json").unwrap();
    let st = unsafe { nf_network_from_json(bad.as_ptr(), &mut net) };
    assert_eq!(st, NfStatus::Parse);
}

#[test]
fn error_message_clears_on_success() {
    let mut net = ptr::null_mut();
    let st = unsafe { nf_network_from_json(ptr::null(), &mut net) };
    assert_eq!(st, NfStatus::NullPointer);
    assert!(!nf_last_error_message().is_null());
    let net = triangle();
    assert!(nf_last_error_message().is_null());
    unsafe { nf_network_free(net) };
}

#[test]
fn solve_energy_and_fiedler() {
    let net = triangle();
    let c = [1.0, 1.0, 1.0];
    let mut p = [0.0; 3];
    let mut q = [0.0; 3];
    let mut solvable = false;
    unsafe {
        let st = nf_solve(net, c.as_ptr(), 3, p.as_mut_ptr(), 3, q.as_mut_ptr(), 3, &mut solvable);
        assert_eq!(st, NfStatus::Ok);
        assert!(solvable);
        assert!((q[0] - 2.0 / 3.0).abs() < 1e-12);
        assert!((q[1] - 1.0 / 3.0).abs() < 1e-12);

        let mut e = 0.0;
        assert_eq!(nf_energy(net, c.as_ptr(), 3, 1.0, 1.0, &mut e), NfStatus::Ok);
        assert!((e - (2.0 / 3.0 + 3.0)).abs() < 1e-12);

        let mut f = 0.0;
        let mut mult = 0usize;
        assert_eq!(nf_fiedler(net, c.as_ptr(), 3, &mut f, &mut mult), NfStatus::Ok);
        assert!((f - 3.0).abs() < 1e-12);
        assert_eq!(mult, 2);

        let mut fm = 0.0;
        assert_eq!(nf_modified_energy(net, c.as_ptr(), 3, 1.0, 0.5, &mut fm), NfStatus::Ok);
        assert!((fm - (e - 0.5 * 3.0)).abs() < 1e-12);

        // Support {(1,2)} cannot carry flow out of vertex 0.
        let cut = [0.0, 0.0, 1.0];
        let st = nf_solve(net, cut.as_ptr(), 3, p.as_mut_ptr(), 3, q.as_mut_ptr(), 3, &mut solvable);
        assert_eq!(st, NfStatus::Ok);
        assert!(!solvable);
        assert_eq!(nf_energy(net, cut.as_ptr(), 3, 1.0, 1.0, &mut e), NfStatus::Ok);
        assert_eq!(e, f64::INFINITY);

        let st = nf_energy(net, c.as_ptr(), 2, 1.0, 1.0, &mut e);
        assert_eq!(st, NfStatus::InvalidArgument);
        let neg = [1.0, -1.0, 1.0];
        assert_eq!(nf_energy(net, neg.as_ptr(), 3, 1.0, 1.0, &mut e), NfStatus::InvalidArgument);
        nf_network_free(net);
    }
}

#[test]
fn optimize_matches_the_triangle_optimum() {
    let net = triangle();
    let mut cfg = nf_optim_config_default();
    cfg.iters = 20_000;
    cfg.seed = 5;
    let mut c = [0.0; 3];
    let mut res = NfOptimResult {
        best_f: 0.0,
        best_k: 0,
        restarts: 0,
        termination: NfTermination::Completed,
        stopped_at: 0,
    };
    unsafe {
        let st = nf_optimize(net, 1.0, 0.0, &cfg, c.as_mut_ptr(), 3, &mut res);
        assert_eq!(st, NfStatus::Ok);
        nf_network_free(net);
    }
    assert_eq!(res.termination, NfTermination::Completed);
    assert!((res.best_f - 2.0).abs() < 1e-6, "{}", res.best_f);
    assert!((c[0] - 1.0).abs() < 1e-3 && c[1] < 1e-3 && c[2] < 1e-3, "{c:?}");
}

#[test]
fn json_networks_work() {
    let json = CString::new(r#"{"vertices": [{"id": 0, "source": 2}, {"id": 1, "source": -2}], "edges": [{"u": 0, "v": 1, "length": 2}]}"#).unwrap();
    let mut net = ptr::null_mut();
    unsafe {
        assert_eq!(nf_network_from_json(json.as_ptr(), &mut net), NfStatus::Ok);
        let c = [4.0];
        let mut e = 0.0;
        assert_eq!(nf_energy(net, c.as_ptr(), 1, 1.0, 1.0, &mut e), NfStatus::Ok);
        // Q²L/C + νCL = 4·2/4 + 4·2
        assert!((e - 10.0).abs() < 1e-12);
        nf_network_free(net);
    }
    let v = unsafe { CStr::from_ptr(nf_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("netforge.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "nf_network_new",
        "nf_network_from_json",
        "nf_network_free",
        "nf_solve",
        "nf_energy",
        "nf_fiedler",
        "nf_modified_energy",
        "nf_optimize",
        "nf_last_error_message",
        "typedef struct NfNetwork NfNetwork",
        "NF_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "netforge.h"

int main(void) {
    size_t u[3] = {0, 0, 1}, v[3] = {1, 2, 2};
    double s[3] = {1.0, -1.0, 0.0}, c[3] = {1.0, 1.0, 1.0};
    NfNetwork *net = NULL;
    if (nf_network_new(3, u, v, NULL, 3, s, &net) != NF_STATUS_OK) return 1;
    double e = 0.0, f = 0.0;
    size_t mult = 0;
    if (nf_energy(net, c, 3, 1.0, 1.0, &e) != NF_STATUS_OK) return 2;
    if (nf_fiedler(net, c, 3, &f, &mult) != NF_STATUS_OK) return 3;
    if (nf_energy(net, c, 2, 1.0, 1.0, &e) != NF_STATUS_INVALID_ARGUMENT) return 4;
    if (nf_last_error_message() == NULL) return 5;
    nf_network_free(net);
    printf("%.12f %.12f %zu\n", e, f, mult);
    return 0;
}
"#;

/// Compiles a C program against the header and the static library. Skipped
/// when no C compiler or static archive is available.
#[test]
fn c_program_links_and_runs() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let archive = deps.parent().unwrap().join("libnetforge_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no cc or {}", archive.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C build failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "3.666666666667 3.000000000000 2");
}
