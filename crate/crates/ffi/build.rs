fn main() {
    let crate_dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let out = std::path::Path::new(&crate_dir).join("include");
    std::fs::create_dir_all(&out).expect("create include dir");
    cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_language(cbindgen::Language::C)
        .with_cpp_compat(true)
        .with_include_guard("WG_STOKES_H")
        .with_header("/* C interface to the wg-stokes weak Galerkin Stokes solver. */")
        .generate()
        .expect("cbindgen header generation")
        .write_to_file(out.join("wg_stokes.h"));
    println!("cargo:rerun-if-changed=src/lib.rs");
}
