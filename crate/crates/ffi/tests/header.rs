use std::path::{Path, PathBuf};
use std::process::Command;

const EXPORTS: &[&str] = &[
    "cl_version",
    "cl_last_error",
    "cl_config_parse",
    "cl_config_builtin",
    "cl_config_free",
    "cl_run",
    "cl_report_json",
    "cl_report_all_hold",
    "cl_report_free",
    "cl_alphabet_new",
    "cl_alphabet_free",
    "cl_word_jet",
    "cl_kappa_m_solve",
];

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/circlelab.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in EXPORTS {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    for variant in ["CL_STATUS_OK = 0", "CL_STATUS_INVALID_INPUT = 3", "CL_STATUS_PANIC = 6"] {
        assert!(text.contains(variant), "{variant}");
    }
    assert!(text.contains("typedef struct ClConfig ClConfig"));
}

fn staticlib() -> Option<PathBuf> {
    let deps = std::env::current_exe().ok()?.parent()?.to_path_buf();
    [deps.join("libcirclelab_ffi.a"), deps.parent()?.join("libcirclelab_ffi.a")]
        .into_iter()
        .find(|p| p.exists())
}

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "circlelab.h"

int main(void) {
    double mats[8] = {1, 2, 0, 1, 1, 0, 2, 1};
    ClAlphabet *a = NULL;
    if (cl_alphabet_new(mats, 2, &a) != CL_STATUS_OK) return 1;
    double jet[4];
    if (cl_word_jet(a, "A", 0.5, jet) != CL_STATUS_OK) return 2;
    cl_alphabet_free(a);
    double k = 0;
    if (cl_kappa_m_solve(0.5, 1.0, &k) != CL_STATUS_NUMERICAL) return 3;
    char msg[256];
    size_t n = cl_last_error(msg, sizeof msg);
    if (n == 0 || n > sizeof msg) return 4;
    printf("%s %.12f\n", cl_version(), jet[0]);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_staticlib() {
    let Some(lib) = staticlib() else {
        eprintln!("staticlib not found next to the test binary, skipping");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.ends_with("0.500000000000\n"), "{stdout}");
}
