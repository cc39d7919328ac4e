//! Compiles a C program against the generated header and static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include "bosegas.h"
#include <math.h>
#include <stdio.h>

int main(void) {
    double k = 0.0;
    if (bg_sphere_kernel(3, 2.0, &k) != BG_STATUS_OK) return 1;
    if (fabs(k - 2.0 * 3.14159265358979323846 * sin(2.0)) > 1e-12) return 2;
    BgSimulation *sim = NULL;
    if (bg_simulation_new("bad", &sim) != BG_STATUS_CONFIG || sim != NULL) return 3;
    char msg[256];
    if (bg_last_error_message(msg, sizeof msg) == 0) return 4;
    const char *cfg =
        "[grid]\ndim = 1\npoints = 32\nbox_length = 20.0\n"
        "[potential]\nn = 1.0\nrho0 = 0.05\n"
        "[initial]\np0 = [0.3]\n"
        "[time]\ndt = 0.01\nt_final = 1.0\nsample_interval = 0.1\n";
    if (bg_simulation_new(cfg, &sim) != BG_STATUS_OK) return 5;
    if (bg_simulation_step(sim, 10) != BG_STATUS_OK) return 6;
    double x[1];
    if (bg_simulation_position(sim, x, 1) != BG_STATUS_OK || !(x[0] > 0.0)) return 7;
    bg_simulation_free(sim);
    printf("ok\n");
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libbosegas_ffi.a");
    if !lib.exists() {
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "bosegas-ffi", "--lib"])
            .arg(format!("--profile={}", if profile_dir.ends_with("release") { "release" } else { "test" }))
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .expect("C compiler");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stdout));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
