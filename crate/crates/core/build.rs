// LAPACK/BLAS come from the system OpenBLAS shared library. Override the
// library name or search path with KREINLAB_LAPACK_LIB / KREINLAB_LAPACK_DIR.
fn main() {
    println!("cargo:rerun-if-env-changed=KREINLAB_LAPACK_LIB");
    println!("cargo:rerun-if-env-changed=KREINLAB_LAPACK_DIR");
    if let Ok(dir) = std::env::var("KREINLAB_LAPACK_DIR") {
        println!("cargo:rustc-link-search=native={dir}");
    }
    let lib = std::env::var("KREINLAB_LAPACK_LIB").unwrap_or_else(|_| "openblas".into());
    println!("cargo:rustc-link-lib=dylib={lib}");
}
