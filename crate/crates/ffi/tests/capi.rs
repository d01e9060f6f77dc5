use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use qrepgame::repeated10::example_cooperation_state;
use qrepgame::stagegames::{classical_twice_repeated, make_pd};
use qrepgame_ffi::*;

fn last_error() -> String {
    let p = qrg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn ground_re() -> Vec<f64> {
    let mut re = vec![0.0; 1024];
    re[0] = 1.0;
    re
}

fn new_pd(re: &[f64], im: Option<&[f64]>, t: f64, r: f64, p: f64, s: f64) -> (QrgStatus, *mut QrgGame) {
    let mut game = ptr::null_mut();
    let status = unsafe {
        qrg_game_new_pd(re.as_ptr(), im.map_or(ptr::null(), |v| v.as_ptr()), re.len(), t, r, p, s, &mut game)
    };
    (status, game)
}

#[test]
fn ground_state_table_is_classical() {
    let (status, game) = new_pd(&ground_re(), None, 5.0, 3.0, 1.0, 0.0);
    assert_eq!(status, QrgStatus::Ok);
    assert!(qrg_last_error().is_null());
    let mut table = vec![0.0; QRG_BIMATRIX_LEN];
    assert_eq!(unsafe { qrg_rep_bimatrix(game, table.as_mut_ptr(), table.len()) }, QrgStatus::Ok);
    let classical = classical_twice_repeated(&make_pd(5.0, 3.0, 1.0, 0.0).unwrap());
    for (i, (u1, u2)) in classical.cells().iter().enumerate() {
        assert_eq!((table[2 * i], table[2 * i + 1]), (*u1, *u2));
    }
    assert_eq!(unsafe { qrg_rep_bimatrix(game, table.as_mut_ptr(), 10) }, QrgStatus::BufferTooSmall);
    unsafe { qrg_game_free(game) };
}

#[test]
fn example_state_spe_and_play() {
    let state = example_cooperation_state();
    let re: Vec<f64> = state.amplitudes().iter().map(|a| a.re).collect();
    let im: Vec<f64> = state.amplitudes().iter().map(|a| a.im).collect();
    let (status, game) = new_pd(&re, Some(&im), 5.0, 4.0, 1.0, 0.0);
    assert_eq!(status, QrgStatus::Ok);

    let mut count = 0usize;
    let st = unsafe { qrg_spe(game, 1e-9, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), 0, &mut count) };
    assert_eq!(st, QrgStatus::BufferTooSmall);
    assert_eq!(count, 2);

    let (mut s1, mut s2, mut pay) = ([0u32; 4], [0u32; 4], [0.0; 8]);
    let st = unsafe { qrg_spe(game, 1e-9, s1.as_mut_ptr(), s2.as_mut_ptr(), pay.as_mut_ptr(), 4, &mut count) };
    assert_eq!(st, QrgStatus::Ok);
    assert_eq!((&s1[..2], &s2[..2]), (&[15, 31][..], &[15, 31][..]));
    assert!((pay[0] - 6.2).abs() < 1e-9 && (pay[2] - 2.0).abs() < 1e-9);

    let (mut a, mut b) = ([0.0; 4], [0.0; 4]);
    unsafe {
        assert_eq!(qrg_play_batch(game, 15, 15, a.as_mut_ptr()), QrgStatus::Ok);
        assert_eq!(qrg_play_sequential(game, 15, 15, b.as_mut_ptr()), QrgStatus::Ok);
    }
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!((a[0] + a[1] - 6.2).abs() < 1e-9);
    unsafe { qrg_game_free(game) };
}

#[test]
fn errors_are_reported() {
    let (status, game) = new_pd(&[1.0; 4], None, 5.0, 3.0, 1.0, 0.0);
    assert_eq!(status, QrgStatus::InvalidState);
    assert!(game.is_null());
    assert!(last_error().contains("1024"));

    let (status, _) = new_pd(&[0.5; 1024], None, 5.0, 3.0, 1.0, 0.0);
    assert_eq!(status, QrgStatus::InvalidState);

    let mut bound = 0.0;
    assert_eq!(unsafe { qrg_cooperation_bound(1.0, 3.0, 5.0, 0.0, &mut bound) }, QrgStatus::InvalidArgument);
    assert!(last_error().contains("Prisoner"));

    let (_, game) = new_pd(&ground_re(), None, 5.0, 3.0, 1.0, 0.0);
    let mut out = [0.0; 4];
    assert_eq!(unsafe { qrg_play_batch(game, 32, 0, out.as_mut_ptr()) }, QrgStatus::InvalidArgument);
    assert_eq!(unsafe { qrg_play_batch(ptr::null(), 0, 0, out.as_mut_ptr()) }, QrgStatus::NullPointer);
    assert!(last_error().contains("game"));
    assert_eq!(unsafe { qrg_play_batch(game, 0, 0, ptr::null_mut()) }, QrgStatus::NullPointer);
    unsafe {
        qrg_game_free(game);
        qrg_game_free(ptr::null_mut());
    }
}

#[test]
fn config_games() {
    let json = CString::new(r#"{"protocol":"mw10","payoffs":{"T":5,"R":3,"P":1,"S":0},"initial_state":{"preset":"ghz(0.3)"}}"#).unwrap();
    let mut game = ptr::null_mut();
    assert_eq!(unsafe { qrg_game_from_json(json.as_ptr(), &mut game) }, QrgStatus::Ok);
    let mut count = 0usize;
    let st = unsafe { qrg_spe(game, 1e-9, ptr::null_mut(), ptr::null_mut(), ptr::null_mut(), 0, &mut count) };
    assert_eq!(st, QrgStatus::Unsupported);
    assert!(last_error().contains("cross-pair entanglement"));
    unsafe { qrg_game_free(game) };

    let bad = CString::new(r#"{"protocol":"mw10"}"#).unwrap();
    assert_eq!(unsafe { qrg_game_from_json(bad.as_ptr(), &mut game) }, QrgStatus::Config);
    let it = CString::new(r#"{"protocol":"iqbal-toor","payoffs":{"T":5,"R":3,"P":1,"S":0}}"#).unwrap();
    assert_eq!(unsafe { qrg_game_from_json(it.as_ptr(), &mut game) }, QrgStatus::Unsupported);
}

#[test]
fn scalar_helpers() {
    let mut bound = 0.0;
    assert_eq!(unsafe { qrg_cooperation_bound(5.0, 3.0, 1.0, 0.0, &mut bound) }, QrgStatus::Ok);
    assert!((bound - 1.0 / 3.0).abs() < 1e-15);
    let mut n = 0u64;
    assert_eq!(unsafe { qrg_qubit_count(3, &mut n) }, QrgStatus::Ok);
    assert_eq!(n, 42);
    assert_eq!(unsafe { qrg_qubit_count(3, ptr::null_mut()) }, QrgStatus::NullPointer);
}

#[test]
fn header_compiles_as_c() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = header_dir.join("qrepgame.h");
    assert!(std::fs::read_to_string(&header).unwrap().contains("qrg_spe"));
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping compile check");
        return;
    };
    let dir = tempfile::TempDir::new().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "qrepgame.h"
int use(void) {
    QrgGame *g = NULL;
    double re[1024] = {1.0};
    QrgStatus s = qrg_game_new_pd(re, NULL, 1024, 5, 3, 1, 0, &g);
    double out[QRG_BIMATRIX_LEN];
    if (s == QRG_STATUS_OK) s = qrg_rep_bimatrix(g, out, QRG_BIMATRIX_LEN);
    qrg_game_free(g);
    return s == QRG_STATUS_OK ? 0 : (qrg_last_error() != NULL);
}
"#,
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-c", "-o"])
        .arg(dir.path().join("use.o"))
        .arg("-I")
        .arg(&header_dir)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
