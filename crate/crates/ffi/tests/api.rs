use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use ddla_ffi::*;

fn last_error() -> String {
    let p = ddla_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sites(c: *const DdlaCluster) -> Vec<(i64, i64)> {
    let mut n = 0usize;
    unsafe {
        ddla_cluster_sites(c, ptr::null_mut(), 0, &mut n);
        let mut buf = vec![0i64; 2 * n];
        assert_eq!(ddla_cluster_sites(c, buf.as_mut_ptr(), n, &mut n), DdlaStatus::Ok);
        buf.chunks(2).map(|p| (p[0], p[1])).collect()
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(ddla_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn origin_grows_deterministically() {
    let run = |seed| unsafe {
        let c = ddla_cluster_new_origin();
        assert_eq!(ddla_grow(c, 200, DdlaSampler::Line, seed), DdlaStatus::Ok);
        assert_eq!(ddla_cluster_len(c), 201);
        let s = sites(c);
        ddla_cluster_free(c);
        s
    };
    assert_eq!(run(5), run(5));
    assert_ne!(run(5), run(6));
}

#[test]
fn next_site_law_of_the_three_site_cluster() {
    let pairs = [0i64, 0, 0, 1, 1, 1];
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(ddla_cluster_from_sites(pairs.as_ptr(), 3, &mut c), DdlaStatus::Ok);
        let mut total = 0.0;
        assert_eq!(ddla_activity_total(c, &mut total), DdlaStatus::Ok);
        assert!((total - 3.5).abs() < 1e-12, "{total}");
        let mut n = 0;
        let mut s = [0i64; 8];
        let mut p = [0f64; 4];
        assert_eq!(ddla_next_site_law(c, s.as_mut_ptr(), p.as_mut_ptr(), 4, &mut n), DdlaStatus::Ok);
        assert_eq!(n, 4);
        assert_eq!(s, [0, 2, 1, 0, 1, 2, 2, 1]);
        let want = [2.0 / 7.0, 1.0 / 7.0, 2.0 / 7.0, 2.0 / 7.0];
        for (x, y) in p.iter().zip(want) {
            assert!((x - y).abs() < 1e-12);
        }
        assert_eq!(ddla_next_site_law(c, s.as_mut_ptr(), p.as_mut_ptr(), 2, &mut n), DdlaStatus::BufferTooSmall);
        ddla_cluster_free(c);
    }
}

#[test]
fn dfpp_contains_continuous_ddla_under_one_harris_system() {
    unsafe {
        let c = ddla_cluster_new_origin();
        let mut added = 0;
        assert_eq!(ddla_grow_continuous(c, 5.0, DdlaContinuousMode::Harris, 9, &mut added), DdlaStatus::Ok);
        assert_eq!(ddla_cluster_len(c) as u64, added + 1);
        let origin = ddla_cluster_new_origin();
        let mut f = ptr::null_mut();
        assert_eq!(ddla_dfpp(origin, 5.0, 9, &mut f), DdlaStatus::Ok);
        for (a, b) in sites(c) {
            assert_eq!(ddla_cluster_contains(f, a, b), 1);
        }
        for p in [c, origin, f] {
            ddla_cluster_free(p);
        }
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut h = 0;
        assert_eq!(ddla_cluster_height(ptr::null(), &mut h), DdlaStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut empty = ptr::null_mut();
        assert_eq!(ddla_cluster_from_sites(ptr::null(), 0, &mut empty), DdlaStatus::Ok);
        assert_eq!(ddla_grow(empty, 1, DdlaSampler::Exact, 0), DdlaStatus::EmptyCluster);
        assert_eq!(ddla_grow_continuous(empty, -1.0, DdlaContinuousMode::Gillespie, 0, ptr::null_mut()), DdlaStatus::InvalidParameter);
        assert!(last_error().contains("horizon"));
        ddla_cluster_free(empty);

        let missing = CString::new("/nonexistent/dir/x.txt").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(ddla_snapshot_load(missing.as_ptr(), &mut out), DdlaStatus::Io);
        assert!(out.is_null());
    }
}

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.txt").to_str().unwrap()).unwrap();
    unsafe {
        let c = ddla_cluster_new_origin();
        assert_eq!(ddla_grow(c, 50, DdlaSampler::Edge, 1), DdlaStatus::Ok);
        assert_eq!(ddla_snapshot_save(c, path.as_ptr()), DdlaStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(ddla_snapshot_load(path.as_ptr(), &mut back), DdlaStatus::Ok);
        assert_eq!(sites(c), sites(back));
        std::fs::write(dir.path().join("c.txt"), "# ddla snapshot\n0 0\n1\n").unwrap();
        assert_eq!(ddla_snapshot_load(path.as_ptr(), &mut back), DdlaStatus::Parse);
        assert!(last_error().contains(":3:"), "{}", last_error());
        ddla_cluster_free(c);
        ddla_cluster_free(back);
    }
}

/// Compiles and runs a C program against the generated header and the static
/// library. Skipped when no C compiler or static archive is available.
#[test]
fn c_program_links_against_the_header() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/ddla.h");
    assert!(header.exists(), "header not generated");
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let archive = profile_dir.join("libddla_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no cc or no {}", archive.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "ddla.h"
int main(void) {
    DdlaCluster *c = ddla_cluster_new_origin();
    if (ddla_grow(c, 100, DDLA_SAMPLER_LINE, 3) != DDLA_STATUS_OK) return 1;
    int64_t h = 0;
    if (ddla_cluster_height(c, &h) != DDLA_STATUS_OK) return 2;
    if (ddla_cluster_height(NULL, &h) != DDLA_STATUS_NULL_POINTER) return 3;
    printf("%zu %lld %s\n", ddla_cluster_len(c), (long long)h, ddla_last_error());
    ddla_cluster_free(c);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(root.join("include"))
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("101 "), "{text}");
    assert!(text.contains("null"), "{text}");
}
