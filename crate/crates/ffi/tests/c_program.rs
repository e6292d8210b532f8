//! Compiles and runs a small C program against the generated header and
//! the static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "portstrat.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *buf = malloc(n + 1);
    fread(buf, 1, n, f);
    buf[n] = 0;
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc != 3) return 2;
    char *rules = slurp(argv[1]);
    char *graph = slurp(argv[2]);
    PortstratSession *s = portstrat_session_new();
    if (portstrat_session_add_rules(s, rules) != PORTSTRAT_STATUS_OK) return 10;
    if (portstrat_session_set_graph(s, graph) != PORTSTRAT_STATUS_OK) return 11;
    PortstratOutcome out;
    PortstratStatus st = portstrat_session_run(s, "repeat*(reduce)", 0, 100000, &out);
    if (st != PORTSTRAT_STATUS_OK || out != PORTSTRAT_OUTCOME_ID) return 12;
    char *text = portstrat_session_graph_text(s);
    printf("%s", text);
    portstrat_string_free(text);
    st = portstrat_session_run(s, "((", 0, 10, NULL);
    if (st != PORTSTRAT_STATUS_STRATEGY_ERROR || !portstrat_session_last_error(s)) return 13;
    portstrat_session_free(s);
    free(rules);
    free(graph);
    return 0;
}
"#;

fn static_lib() -> PathBuf {
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().join("libportstrat_ffi.a")
}

#[test]
fn header_compiles_and_links() {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = static_lib();
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-Wno-unused-result"])
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));

    let corpus = manifest.join("../core/corpus");
    let out = Command::new(&exe).arg(corpus.join("arithmetic.rules")).arg(corpus.join("neg-3.graph")).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("SIGNATURE"), "{text}");
}
