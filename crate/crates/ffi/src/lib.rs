//! C ABI surface over the exact jet engine.
//!
//! Conventions:
//! - Objects are returned as opaque handles; every constructor has a
//!   matching `*_free`, and strings returned by the library are released
//!   with `holodyn_string_free`.
//! - Fallible calls return a null pointer (or a nonzero status) on error;
//!   `holodyn_last_error` returns a thread-local message and
//!   `holodyn_last_code` the matching status code.
//! - All input strings are NUL-terminated UTF-8 expressions in the same
//!   grammar as the CLI (`*` explicit, `^` powers, `i` and `tau` literals;
//!   no unary minus — write `0-x`).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};

use holodyn::holonomy::{dicritical_check, holonomy, xy_invariance_check, ZConvention};
use holodyn::lie::{
    bracket, commutator_diffeo, compose_diffeo, exp_field, invert_diffeo, log_diffeo, PairJson,
};
use holodyn::parse::{parse_jet, parse_poly, parse_scalar};
use holodyn::{Diffeo2, EngineError, VField2};

/// Status codes mirrored in `holodyn_last_code`.
#[repr(C)]
pub enum HolodynStatus {
    /// Success.
    HolodynOk = 0,
    /// Null pointer, invalid UTF-8, or out-of-range argument.
    HolodynUsage = 2,
    /// Parse or domain error from the engine.
    HolodynDomain = 3,
}

/// Opaque handle to a truncated vector field.
pub struct HolodynField(VField2);

/// Opaque handle to a truncated tangent-to-identity map.
pub struct HolodynMap(Diffeo2);

thread_local! {
    static LAST_ERROR: RefCell<(i32, CString)> =
        RefCell::new((0, CString::new("").unwrap()));
}

fn set_error(code: i32, msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap();
    LAST_ERROR.with(|e| *e.borrow_mut() = (code, msg));
}

fn clear_error() {
    set_error(0, "");
}

fn engine_err(e: EngineError) -> i32 {
    set_error(3, &e.to_string());
    3
}

/// Last error message for this thread; valid until the next library call.
#[no_mangle]
pub extern "C" fn holodyn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().1.as_ptr())
}

/// Last status code for this thread (see `HolodynStatus`).
#[no_mangle]
pub extern "C" fn holodyn_last_code() -> i32 {
    LAST_ERROR.with(|e| e.borrow().0)
}

unsafe fn cstr<'a>(p: *const c_char) -> Option<&'a str> {
    if p.is_null() {
        set_error(2, "null string argument");
        return None;
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Some(s),
        Err(_) => {
            set_error(2, "string argument is not valid UTF-8");
            None
        }
    }
}

fn check_trunc(trunc: u32) -> bool {
    if (1..=16).contains(&trunc) {
        true
    } else {
        set_error(2, "truncation outside 1..=16");
        false
    }
}

fn leak_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap().into_raw()
}

/// Parse a vector field from two component expressions in x, y.
///
/// # Safety
/// `jx` and `jy` must be NUL-terminated strings or null.
#[no_mangle]
pub unsafe extern "C" fn holodyn_field_parse(
    jx: *const c_char,
    jy: *const c_char,
    trunc: u32,
) -> *mut HolodynField {
    clear_error();
    let (Some(jx), Some(jy)) = (cstr(jx), cstr(jy)) else {
        return std::ptr::null_mut();
    };
    if !check_trunc(trunc) {
        return std::ptr::null_mut();
    }
    let build = || -> Result<VField2, EngineError> {
        VField2::new(parse_jet(jx, trunc)?, parse_jet(jy, trunc)?)
    };
    match build() {
        Ok(v) => Box::into_raw(Box::new(HolodynField(v))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Parse a map from two component expressions in x, y.
///
/// # Safety
/// `fx` and `fy` must be NUL-terminated strings or null.
#[no_mangle]
pub unsafe extern "C" fn holodyn_map_parse(
    fx: *const c_char,
    fy: *const c_char,
    trunc: u32,
) -> *mut HolodynMap {
    clear_error();
    let (Some(fx), Some(fy)) = (cstr(fx), cstr(fy)) else {
        return std::ptr::null_mut();
    };
    if !check_trunc(trunc) {
        return std::ptr::null_mut();
    }
    let build = || -> Result<Diffeo2, EngineError> {
        Diffeo2::new(parse_jet(fx, trunc)?, parse_jet(fy, trunc)?)
    };
    match build() {
        Ok(v) => Box::into_raw(Box::new(HolodynMap(v))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Release a field handle. Null is a no-op.
///
/// # Safety
/// `p` must be a pointer returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn holodyn_field_free(p: *mut HolodynField) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Release a map handle. Null is a no-op.
///
/// # Safety
/// `p` must be a pointer returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn holodyn_map_free(p: *mut HolodynMap) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `p` must be a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn holodyn_string_free(p: *mut c_char) {
    if !p.is_null() {
        drop(CString::from_raw(p));
    }
}

/// Time-`t` flow of a field; `time` is an exact scalar expression
/// (e.g. "1", "1/2", "tau").
///
/// # Safety
/// `x` must be a live field handle; `time` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn holodyn_exp(
    x: *const HolodynField,
    time: *const c_char,
) -> *mut HolodynMap {
    clear_error();
    if x.is_null() {
        set_error(2, "null field handle");
        return std::ptr::null_mut();
    }
    let Some(time) = cstr(time) else {
        return std::ptr::null_mut();
    };
    let x = &(*x).0;
    let run = || -> Result<Diffeo2, EngineError> {
        let t = parse_scalar(time)?;
        if x.is_zero() {
            Ok(Diffeo2::identity(x.trunc()))
        } else {
            exp_field(x, &t)
        }
    };
    match run() {
        Ok(f) => Box::into_raw(Box::new(HolodynMap(f))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Infinitesimal generator of a tangent-to-identity map.
///
/// # Safety
/// `f` must be a live map handle.
#[no_mangle]
pub unsafe extern "C" fn holodyn_log(f: *const HolodynMap) -> *mut HolodynField {
    clear_error();
    if f.is_null() {
        set_error(2, "null map handle");
        return std::ptr::null_mut();
    }
    match log_diffeo(&(*f).0) {
        Ok(x) => Box::into_raw(Box::new(HolodynField(x))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Bracket of two fields (engine orientation, adapted to left composition).
///
/// # Safety
/// `a` and `b` must be live field handles.
#[no_mangle]
pub unsafe extern "C" fn holodyn_bracket(
    a: *const HolodynField,
    b: *const HolodynField,
) -> *mut HolodynField {
    clear_error();
    if a.is_null() || b.is_null() {
        set_error(2, "null field handle");
        return std::ptr::null_mut();
    }
    if (*a).0.trunc() != (*b).0.trunc() {
        set_error(3, "truncation degrees differ");
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(HolodynField(bracket(&(*a).0, &(*b).0))))
}

/// Group commutator `F G F^{-1} G^{-1}`.
///
/// # Safety
/// `f` and `g` must be live map handles.
#[no_mangle]
pub unsafe extern "C" fn holodyn_commutator(
    f: *const HolodynMap,
    g: *const HolodynMap,
) -> *mut HolodynMap {
    clear_error();
    if f.is_null() || g.is_null() {
        set_error(2, "null map handle");
        return std::ptr::null_mut();
    }
    match commutator_diffeo(&(*f).0, &(*g).0) {
        Ok(k) => Box::into_raw(Box::new(HolodynMap(k))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Composition `F` after `G`.
///
/// # Safety
/// `f` and `g` must be live map handles.
#[no_mangle]
pub unsafe extern "C" fn holodyn_compose(
    f: *const HolodynMap,
    g: *const HolodynMap,
) -> *mut HolodynMap {
    clear_error();
    if f.is_null() || g.is_null() {
        set_error(2, "null map handle");
        return std::ptr::null_mut();
    }
    match compose_diffeo(&(*f).0, &(*g).0) {
        Ok(k) => Box::into_raw(Box::new(HolodynMap(k))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Compositional inverse.
///
/// # Safety
/// `f` must be a live map handle.
#[no_mangle]
pub unsafe extern "C" fn holodyn_invert(f: *const HolodynMap) -> *mut HolodynMap {
    clear_error();
    if f.is_null() {
        set_error(2, "null map handle");
        return std::ptr::null_mut();
    }
    match invert_diffeo(&(*f).0) {
        Ok(k) => Box::into_raw(Box::new(HolodynMap(k))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Serialize a field to JSON (free with `holodyn_string_free`).
///
/// # Safety
/// `x` must be a live field handle.
#[no_mangle]
pub unsafe extern "C" fn holodyn_field_to_json(x: *const HolodynField) -> *mut c_char {
    clear_error();
    if x.is_null() {
        set_error(2, "null field handle");
        return std::ptr::null_mut();
    }
    leak_string(serde_json::to_string(&(*x).0.to_json()).unwrap())
}

/// Serialize a map to JSON (free with `holodyn_string_free`).
///
/// # Safety
/// `f` must be a live map handle.
#[no_mangle]
pub unsafe extern "C" fn holodyn_map_to_json(f: *const HolodynMap) -> *mut c_char {
    clear_error();
    if f.is_null() {
        set_error(2, "null map handle");
        return std::ptr::null_mut();
    }
    leak_string(serde_json::to_string(&(*f).0.to_json()).unwrap())
}

/// Rebuild a field from JSON produced by `holodyn_field_to_json`.
///
/// # Safety
/// `json` must be a NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn holodyn_field_from_json(json: *const c_char) -> *mut HolodynField {
    clear_error();
    let Some(json) = cstr(json) else {
        return std::ptr::null_mut();
    };
    let pair: PairJson = match serde_json::from_str(json) {
        Ok(p) => p,
        Err(e) => {
            set_error(3, &format!("json: {e}"));
            return std::ptr::null_mut();
        }
    };
    match VField2::from_json(&pair) {
        Ok(v) => Box::into_raw(Box::new(HolodynField(v))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Rebuild a map from JSON produced by `holodyn_map_to_json`.
///
/// # Safety
/// `json` must be a NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn holodyn_map_from_json(json: *const c_char) -> *mut HolodynMap {
    clear_error();
    let Some(json) = cstr(json) else {
        return std::ptr::null_mut();
    };
    let pair: PairJson = match serde_json::from_str(json) {
        Ok(p) => p,
        Err(e) => {
            set_error(3, &format!("json: {e}"));
            return std::ptr::null_mut();
        }
    };
    match Diffeo2::from_json(&pair) {
        Ok(v) => Box::into_raw(Box::new(HolodynMap(v))),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

/// Holonomy of the foliation defined by components `a`, `b` (expressions in
/// x, y, z) up to degree `trunc`; `convention` is 0 for the return-map sign,
/// 1 for the flow sign. Returns a JSON report `{diffeo, xy_invariant,
/// dicritical}` (free with `holodyn_string_free`).
///
/// # Safety
/// `a` and `b` must be NUL-terminated strings or null.
#[no_mangle]
pub unsafe extern "C" fn holodyn_holonomy(
    a: *const c_char,
    b: *const c_char,
    trunc: u32,
    convention: i32,
) -> *mut c_char {
    clear_error();
    let (Some(a), Some(b)) = (cstr(a), cstr(b)) else {
        return std::ptr::null_mut();
    };
    if !check_trunc(trunc) {
        return std::ptr::null_mut();
    }
    let conv = match convention {
        0 => ZConvention::MinusZ,
        1 => ZConvention::PlusZ,
        _ => {
            set_error(2, "convention must be 0 or 1");
            return std::ptr::null_mut();
        }
    };
    let run = || -> Result<String, EngineError> {
        let res = holonomy(&parse_poly(a)?, &parse_poly(b)?, trunc, conv)?;
        let inv = xy_invariance_check(&res.diffeo);
        let dic = dicritical_check(&res.diffeo)?;
        let mut obj = serde_json::Map::new();
        obj.insert("diffeo".into(), serde_json::to_value(res.diffeo.to_json()).unwrap());
        obj.insert("xy_invariant".into(), inv.holds.into());
        obj.insert("dicritical".into(), dic.into());
        Ok(serde_json::Value::Object(obj).to_string())
    };
    match run() {
        Ok(s) => leak_string(s),
        Err(e) => {
            engine_err(e);
            std::ptr::null_mut()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn cs(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    unsafe fn take_string(p: *mut c_char) -> String {
        assert!(!p.is_null(), "error: {:?}", CStr::from_ptr(holodyn_last_error()));
        let s = CStr::from_ptr(p).to_str().unwrap().to_string();
        holodyn_string_free(p);
        s
    }

    #[test]
    fn exp_log_round_trip_through_the_abi() {
        unsafe {
            let x = holodyn_field_parse(cs("x^2").as_ptr(), cs("0-x*y").as_ptr(), 6);
            assert!(!x.is_null());
            let f = holodyn_exp(x, cs("1").as_ptr());
            assert!(!f.is_null());
            let back = holodyn_log(f);
            assert!(!back.is_null());
            let a = take_string(holodyn_field_to_json(x));
            let b = take_string(holodyn_field_to_json(back));
            assert_eq!(a, b);
            holodyn_field_free(x);
            holodyn_field_free(back);
            holodyn_map_free(f);
        }
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        unsafe {
            let f = holodyn_map_parse(cs("x+x^2*y").as_ptr(), cs("y").as_ptr(), 5);
            let j1 = take_string(holodyn_map_to_json(f));
            let f2 = holodyn_map_from_json(cs(&j1).as_ptr());
            let j2 = take_string(holodyn_map_to_json(f2));
            assert_eq!(j1, j2);
            holodyn_map_free(f);
            holodyn_map_free(f2);
        }
    }

    #[test]
    fn commutator_and_compose() {
        unsafe {
            let f = holodyn_map_parse(cs("x+x^2*y").as_ptr(), cs("y").as_ptr(), 6);
            let g = holodyn_map_parse(cs("x").as_ptr(), cs("y+x*y^2").as_ptr(), 6);
            let k = holodyn_commutator(f, g);
            assert!(!k.is_null());
            let inv = holodyn_invert(f);
            let round = holodyn_compose(f, inv);
            let id = holodyn_map_parse(cs("x").as_ptr(), cs("y").as_ptr(), 6);
            assert_eq!(
                take_string(holodyn_map_to_json(round)),
                take_string(holodyn_map_to_json(id))
            );
            for p in [f, g, k, inv, round, id] {
                holodyn_map_free(p);
            }
        }
    }

    #[test]
    fn holonomy_report() {
        unsafe {
            let rep = holodyn_holonomy(
                cs("x*(1+x*y*z^2)").as_ptr(),
                cs("y*(1-x*y*z^2)").as_ptr(),
                6,
                0,
            );
            let s = take_string(rep);
            let v: serde_json::Value = serde_json::from_str(&s).unwrap();
            assert_eq!(v["xy_invariant"], serde_json::Value::Bool(true));
            assert_eq!(v["dicritical"], serde_json::Value::Bool(false));
        }
    }

    #[test]
    fn error_paths_set_code_and_message() {
        unsafe {
            assert!(holodyn_field_parse(std::ptr::null(), cs("y").as_ptr(), 6).is_null());
            assert_eq!(holodyn_last_code(), 2);
            assert!(holodyn_field_parse(cs("x^").as_ptr(), cs("y").as_ptr(), 6).is_null());
            assert_eq!(holodyn_last_code(), 3);
            let msg = CStr::from_ptr(holodyn_last_error()).to_str().unwrap();
            assert!(msg.contains("position"), "message: {msg}");
            assert!(holodyn_map_parse(cs("x").as_ptr(), cs("y").as_ptr(), 0).is_null());
            assert_eq!(holodyn_last_code(), 2);
            // log rejects a map that is not tangent to the identity
            let f = holodyn_map_parse(cs("2*x").as_ptr(), cs("y").as_ptr(), 4);
            assert!(!f.is_null());
            assert!(holodyn_log(f).is_null());
            assert_eq!(holodyn_last_code(), 3);
            holodyn_map_free(f);
        }
    }
}
