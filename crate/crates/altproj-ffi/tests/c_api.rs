use std::ffi::CStr;
use std::ptr;

use altproj_ffi::*;

fn subspace(rows: &[&[f64]], n: usize) -> *mut AltprojSubspace {
    let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    let mut out = ptr::null_mut();
    let st = unsafe { altproj_subspace_from_vectors(data.as_ptr(), rows.len(), n, &mut out) };
    assert_eq!(st, AltprojStatus::Ok);
    out
}

fn last_error() -> String {
    let p = altproj_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn subspace_lifecycle_and_projection() {
    let s = subspace(&[&[1.0, 1.0, 0.0], &[2.0, 2.0, 0.0]], 3);
    let (mut d, mut n) = (0, 0);
    assert_eq!(unsafe { altproj_subspace_dims(s, &mut d, &mut n) }, AltprojStatus::Ok);
    assert_eq!((d, n), (1, 3));
    let mut out = [0.0; 3];
    let st = unsafe { altproj_subspace_project(s, [1.0, 0.0, 5.0].as_ptr(), 3, out.as_mut_ptr()) };
    assert_eq!(st, AltprojStatus::Ok);
    assert!((out[0] - 0.5).abs() < 1e-15 && (out[1] - 0.5).abs() < 1e-15 && out[2] == 0.0);
    let st = unsafe { altproj_subspace_project(s, [1.0, 0.0].as_ptr(), 2, out.as_mut_ptr()) };
    assert_eq!(st, AltprojStatus::DimensionMismatch);
    assert!(!last_error().is_empty());
    unsafe {
        altproj_subspace_free(s);
        altproj_subspace_free(ptr::null_mut());
    }
}

#[test]
fn intersection_and_cosine() {
    let a = subspace(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], 3);
    let b = subspace(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 1.0]], 3);
    let list = [a as *const _, b as *const _];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { altproj_intersect(list.as_ptr(), 2, &mut m) }, AltprojStatus::Ok);
    let mut d = 0;
    unsafe { altproj_subspace_dims(m, &mut d, ptr::null_mut()) };
    assert_eq!(d, 1);
    let mut c = 0.0;
    assert_eq!(unsafe { altproj_friedrichs_cosine(a, b, &mut c) }, AltprojStatus::Ok);
    assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    unsafe {
        altproj_subspace_free(a);
        altproj_subspace_free(b);
        altproj_subspace_free(m);
    }
}

#[test]
fn periodic_run_on_figure_lines() {
    let a = subspace(&[&[1.0, 1.0]], 2);
    let b = subspace(&[&[1.0, 0.0]], 2);
    let list = [a as *const _, b as *const _];
    let pattern = [1usize, 2];
    let mut x = [0.0; 2];
    let mut steps = 0;
    let st = unsafe { altproj_run_periodic(list.as_ptr(), 2, pattern.as_ptr(), 2, [1.0, 0.0].as_ptr(), 2, 10_000, 1e-10, x.as_mut_ptr(), &mut steps) };
    assert_eq!(st, AltprojStatus::Ok);
    assert!(x[0].abs() < 1e-10 && x[1].abs() < 1e-10);
    assert!(steps > 0);
    let st = unsafe { altproj_run_periodic(list.as_ptr(), 2, pattern.as_ptr(), 2, [1.0, 0.0].as_ptr(), 2, 3, 1e-10, x.as_mut_ptr(), &mut steps) };
    assert_eq!(st, AltprojStatus::NotConverged);
    let bad = [3usize];
    let st = unsafe { altproj_run_periodic(list.as_ptr(), 2, bad.as_ptr(), 1, [1.0, 0.0].as_ptr(), 2, 10, 1e-10, x.as_mut_ptr(), &mut steps) };
    assert_eq!(st, AltprojStatus::InvalidArgument);
    unsafe {
        altproj_subspace_free(a);
        altproj_subspace_free(b);
    }
}

#[test]
fn dense_kaczmarz() {
    let a = [1.0, 0.0, 0.0, 1.0];
    let mut x = [0.0; 2];
    let mut sweeps = 0;
    let st = unsafe { altproj_kaczmarz_dense(a.as_ptr(), 2, 2, [3.0, -2.0].as_ptr(), ptr::null(), 10, 1e-14, x.as_mut_ptr(), &mut sweeps) };
    assert_eq!(st, AltprojStatus::Ok);
    assert_eq!((x, sweeps), ([3.0, -2.0], 1));
    let par = [1.0, 1.0, 1.0, 1.0];
    let st = unsafe { altproj_kaczmarz_dense(par.as_ptr(), 2, 2, [0.0, 1.0].as_ptr(), ptr::null(), 10_000, 1e-12, x.as_mut_ptr(), &mut sweeps) };
    assert_eq!(st, AltprojStatus::NotConverged);
    assert!(last_error().contains("inconsistent"));
}

#[test]
fn thirds_and_k() {
    let (mut l, mut r, mut ok) = (0.0, 0.0, 0);
    assert_eq!(unsafe { altproj_thirds(0.5, 0.3, 0.2, 15, &mut l, &mut r, &mut ok) }, AltprojStatus::Ok);
    assert!((l - 1.0 / 3.0).abs() < 1e-8 && (r - 2.0 / 3.0).abs() < 1e-8 && ok == 1);
    assert_eq!(unsafe { altproj_thirds(-1.0, 1.0, 1.0, 1, &mut l, &mut r, &mut ok) }, AltprojStatus::InvalidArgument);
    let mut k = 0;
    assert_eq!(unsafe { altproj_k_of_eps(0.5, &mut k) }, AltprojStatus::Ok);
    assert_eq!(k, 3);
    assert_eq!(unsafe { altproj_k_of_eps(0.0, &mut k) }, AltprojStatus::InvalidArgument);
    assert_eq!(unsafe { altproj_k_of_eps(0.5, ptr::null_mut()) }, AltprojStatus::NullPointer);
}

#[test]
fn null_inputs_are_reported() {
    let mut out = ptr::null_mut();
    let st = unsafe { altproj_subspace_from_vectors(ptr::null(), 2, 3, &mut out) };
    assert_eq!(st, AltprojStatus::NullPointer);
    assert!(last_error().contains("null"));
    let st = unsafe { altproj_subspace_dims(ptr::null(), ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, AltprojStatus::NullPointer);
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let tmp = std::env::temp_dir().join(format!("altproj_header_{}.c", std::process::id()));
    std::fs::write(
        &tmp,
        "#include \"altproj.h\"\nint main(void) { AltprojSubspace *s = 0; size_t k = 0;\n\
         AltprojStatus st = altproj_k_of_eps(0.5, &k); altproj_subspace_free(s);\n\
         return st == ALTPROJ_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(format!("{dir}/include"))
        .arg(&tmp)
        .status()
        .expect("a C compiler");
    let _ = std::fs::remove_file(&tmp);
    assert!(status.success());
}
