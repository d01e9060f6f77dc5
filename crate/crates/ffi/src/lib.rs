//! C ABI over the ten-qubit protocol.
//!
//! Every function returns a [`QrgStatus`]. On failure the message is kept per
//! thread and can be read with [`qrg_last_error`]. Strategies are indices in
//! `0..32`: `stage1·16 + a00·8 + a01·4 + a10·2 + a11`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use qrepgame::config::{GameConfig, Protocol};
use qrepgame::equilibria::{cooperation_bound, spe_pair_product};
use qrepgame::qstate::PureState;
use qrepgame::repeated10::{play_batch, play_sequential, rep_bimatrix, RepGame};
use qrepgame::stagegames::{make_pd, qubit_count, RepStrategy, StageGame, StagePayoffs};
use qrepgame::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QrgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    Unsupported = 4,
    BufferTooSmall = 5,
    Config = 6,
    Panic = 7,
}

/// Opaque game handle.
pub struct QrgGame {
    inner: RepGame,
}

/// Entries written by [`qrg_rep_bimatrix`]: 32×32 cells, two payoffs each.
pub const QRG_BIMATRIX_LEN: usize = 2048;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: QrgStatus, msg: impl Into<String>) -> QrgStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> QrgStatus {
    match e {
        Error::UnsupportedState(_) | Error::NoPureEquilibrium { .. } => QrgStatus::Unsupported,
        Error::Config(_) | Error::Json(_) => QrgStatus::Config,
        Error::NotNormalized(_) | Error::LengthMismatch { .. } | Error::InvalidQubitCount(_) => QrgStatus::InvalidState,
        _ => QrgStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), QrgStatus>) -> QrgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QrgStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(QrgStatus::Panic, "internal panic"),
    }
}

fn check<T>(r: qrepgame::Result<T>) -> Result<T, QrgStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), QrgStatus> {
    if p.is_null() {
        Err(fail(QrgStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn strategy(index: u32) -> Result<RepStrategy, QrgStatus> {
    check(RepStrategy::from_index(index as usize))
}

unsafe fn game_ref<'a>(game: *const QrgGame) -> Result<&'a RepGame, QrgStatus> {
    non_null(game, "game")?;
    Ok(&(*game).inner)
}

unsafe fn build_game(re: *const f64, im: *const f64, len: usize, stage: StageGame) -> Result<Box<QrgGame>, QrgStatus> {
    non_null(re, "re")?;
    if len != 1024 {
        return Err(fail(QrgStatus::InvalidState, format!("expected 1024 amplitudes, got {len}")));
    }
    let re = std::slice::from_raw_parts(re, len);
    let amps: Vec<Complex64> = if im.is_null() {
        re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    } else {
        let im = std::slice::from_raw_parts(im, len);
        re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    };
    let state = check(PureState::with_tolerance(10, amps, 1e-9))?;
    let inner = check(RepGame::new(state, stage))?;
    Ok(Box::new(QrgGame { inner }))
}

unsafe fn store(out: *mut *mut QrgGame, game: Box<QrgGame>) {
    *out = Box::into_raw(game);
}

/// Creates a game on a ten-qubit state with PD payoffs `T, R, P, S`.
///
/// `re` and `im` hold `len = 1024` amplitudes, qubit 1 most significant;
/// `im` may be null for real states. The squared norm must be 1 within 1e-9.
///
/// # Safety
/// `re` (and `im` if not null) must point to `len` readable doubles and `out`
/// to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn qrg_game_new_pd(
    re: *const f64,
    im: *const f64,
    len: usize,
    t: f64,
    r: f64,
    p: f64,
    s: f64,
    out: *mut *mut QrgGame,
) -> QrgStatus {
    guard(|| {
        non_null(out, "out")?;
        let stage = check(make_pd(t, r, p, s))?;
        store(out, build_game(re, im, len, stage)?);
        Ok(())
    })
}

/// Like [`qrg_game_new_pd`] with a general stage game: `outcomes` holds
/// `u1, u2` for the outcomes 00, 01, 10, 11 in that order (8 doubles).
///
/// # Safety
/// As for [`qrg_game_new_pd`]; `outcomes` must point to 8 readable doubles.
#[no_mangle]
pub unsafe extern "C" fn qrg_game_new(
    re: *const f64,
    im: *const f64,
    len: usize,
    outcomes: *const f64,
    out: *mut *mut QrgGame,
) -> QrgStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(outcomes, "outcomes")?;
        let o = std::slice::from_raw_parts(outcomes, 8);
        let stage = check(StageGame::new([[(o[0], o[1]), (o[2], o[3])], [(o[4], o[5]), (o[6], o[7])]]))?;
        store(out, build_game(re, im, len, stage)?);
        Ok(())
    })
}

/// Creates a game from a JSON configuration with protocol `mw10` or
/// `classical`.
///
/// # Safety
/// `json` must be a nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qrg_game_from_json(json: *const c_char, out: *mut *mut QrgGame) -> QrgStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(json, "json")?;
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| fail(QrgStatus::Config, "config is not valid UTF-8"))?;
        let setup = check(GameConfig::from_json_str(text).and_then(|c| c.build()))?;
        let state = match setup.protocol {
            Protocol::Mw10 => setup.initial.expect("mw10 has a state"),
            Protocol::Classical => check(PureState::basis(10, 0))?,
            Protocol::IqbalToor => return Err(fail(QrgStatus::Unsupported, "iqbal-toor games are not exposed")),
        };
        let inner = check(RepGame::new(state, setup.stage))?;
        store(out, Box::new(QrgGame { inner }));
        Ok(())
    })
}

/// Releases a game. Null is ignored.
///
/// # Safety
/// `game` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qrg_game_free(game: *mut QrgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

unsafe fn write_payoffs(e: &StagePayoffs, out: *mut f64) {
    let values = [e.get(1, 1), e.get(1, 2), e.get(2, 1), e.get(2, 2)];
    ptr::copy_nonoverlapping(values.as_ptr(), out, 4);
}

/// Writes `E1.1, E1.2, E2.1, E2.2` of a pure profile, all moves applied at once.
///
/// # Safety
/// `game` must be live and `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qrg_play_batch(game: *const QrgGame, s1: u32, s2: u32, out: *mut f64) -> QrgStatus {
    guard(|| {
        let g = game_ref(game)?;
        non_null(out, "out")?;
        write_payoffs(&play_batch(g, &strategy(s1)?, &strategy(s2)?), out);
        Ok(())
    })
}

/// Same as [`qrg_play_batch`] with a measurement between the stages.
///
/// # Safety
/// As for [`qrg_play_batch`].
#[no_mangle]
pub unsafe extern "C" fn qrg_play_sequential(game: *const QrgGame, s1: u32, s2: u32, out: *mut f64) -> QrgStatus {
    guard(|| {
        let g = game_ref(game)?;
        non_null(out, "out")?;
        write_payoffs(&play_sequential(g, &strategy(s1)?, &strategy(s2)?).payoffs, out);
        Ok(())
    })
}

/// Writes the 32×32 table of total payoffs row-major, `u1, u2` per cell.
///
/// # Safety
/// `game` must be live and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn qrg_rep_bimatrix(game: *const QrgGame, out: *mut f64, len: usize) -> QrgStatus {
    guard(|| {
        let g = game_ref(game)?;
        non_null(out, "out")?;
        if len < QRG_BIMATRIX_LEN {
            return Err(fail(QrgStatus::BufferTooSmall, format!("need {QRG_BIMATRIX_LEN} doubles, got {len}")));
        }
        let bm = rep_bimatrix(g);
        let out = std::slice::from_raw_parts_mut(out, QRG_BIMATRIX_LEN);
        for (i, (u1, u2)) in bm.cells().iter().enumerate() {
            out[2 * i] = *u1;
            out[2 * i + 1] = *u2;
        }
        Ok(())
    })
}

/// Subgame-perfect equilibria of a pair-product game.
///
/// Writes at most `capacity` profiles into `s1`, `s2` and `payoffs` (two
/// doubles per profile) and the total count into `count`. When the count
/// exceeds `capacity` the status is `BufferTooSmall` and `count` is still
/// set. Passing `capacity = 0` with null arrays queries the count.
///
/// # Safety
/// The arrays must hold `capacity` (resp. `2·capacity`) writable elements and
/// `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrg_spe(
    game: *const QrgGame,
    tol: f64,
    s1: *mut u32,
    s2: *mut u32,
    payoffs: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> QrgStatus {
    guard(|| {
        let g = game_ref(game)?;
        non_null(count, "count")?;
        let report = check(spe_pair_product(g, tol))?;
        *count = report.len();
        if report.len() > capacity {
            return Err(fail(
                QrgStatus::BufferTooSmall,
                format!("{} equilibria, capacity {capacity}", report.len()),
            ));
        }
        if report.is_empty() {
            return Ok(());
        }
        non_null(s1, "s1")?;
        non_null(s2, "s2")?;
        non_null(payoffs, "payoffs")?;
        for (i, e) in report.equilibria.iter().enumerate() {
            *s1.add(i) = e.row as u32;
            *s2.add(i) = e.col as u32;
            *payoffs.add(2 * i) = e.payoff.0;
            *payoffs.add(2 * i + 1) = e.payoff.1;
        }
        Ok(())
    })
}

/// `min{T-R, P-S} / (T-R+P-S)` for a prisoners' dilemma.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrg_cooperation_bound(t: f64, r: f64, p: f64, s: f64, out: *mut f64) -> QrgStatus {
    guard(|| {
        non_null(out, "out")?;
        let stage = check(make_pd(t, r, p, s))?;
        *out = check(cooperation_bound(&stage))?;
        Ok(())
    })
}

/// Qubits needed for `stages` rounds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qrg_qubit_count(stages: u32, out: *mut u64) -> QrgStatus {
    guard(|| {
        non_null(out, "out")?;
        let n = check(qubit_count(stages))?;
        *out = u64::try_from(n).map_err(|_| fail(QrgStatus::InvalidArgument, "count does not fit in 64 bits"))?;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn qrg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
