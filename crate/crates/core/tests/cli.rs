//! End-to-end checks of the `wg-stokes` binary: exit codes, CSV schemas and
//! byte-for-byte deterministic reruns.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wg-stokes"))
}

#[test]
fn convergence_subcommand_writes_schema_csv() {
    let dir = std::env::temp_dir().join("wg_stokes_cli_convergence");
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "convergence",
            "--dim",
            "2",
            "--levels",
            "4,8",
            "--mu",
            "1",
            "--out",
        ])
        .arg(&dir)
        .output()
        .expect("run binary");
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("convergence_2d_mu1.csv")).unwrap();
    assert!(csv.starts_with(
        "level,h,err_p,order_p,err_grad,order_grad,err_u0,order_u0,err_proj,order_proj"
    ));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn iterations_subcommand_is_deterministic() {
    let run = |dir: &Path| {
        let out = bin()
            .args([
                "iterations",
                "--dim",
                "2",
                "--levels",
                "4,8",
                "--mu",
                "1,1e-4",
                "--d11",
                "one",
                "--precond",
                "pd,pl-",
                "--out",
            ])
            .arg(dir)
            .output()
            .expect("run binary");
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    };
    let dir1 = std::env::temp_dir().join("wg_stokes_cli_iter1");
    let dir2 = std::env::temp_dir().join("wg_stokes_cli_iter2");
    for d in [&dir1, &dir2] {
        let _ = std::fs::remove_dir_all(d);
        run(d);
    }
    for name in ["iterations_2d_minres_pd.csv", "iterations_2d_gmres_pl-.csv"] {
        let a = std::fs::read(dir1.join(name)).unwrap();
        let b = std::fs::read(dir2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("d11,mu,level,n_elements,n_unknowns,iters,converged,final_true_residual"));
    }
}

#[test]
fn spectrum_subcommand_flags_known_violations_with_exit_code_2() {
    let dir = std::env::temp_dir().join("wg_stokes_cli_spectrum");
    let _ = std::fs::remove_dir_all(&dir);
    let out = bin()
        .args([
            "spectrum",
            "--dim",
            "2",
            "--levels",
            "4",
            "--mu",
            "1e-4",
            "--d11",
            "one",
            "--out",
        ])
        .arg(&dir)
        .output()
        .expect("run binary");
    // The diag-preconditioned spectrum carries the eigenvalue-one family
    // outside the predicted regions, so the bound check must trip.
    assert_eq!(out.status.code(), Some(2), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.join("bounds_summary.txt").exists());
    assert!(dir.join("schur_eigs_2_n4_mu0.0001_d11one.csv").exists());
}

#[test]
fn solve_subcommand_reports_and_honors_config_file() {
    let dir = std::env::temp_dir().join("wg_stokes_cli_solve");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config = dir.join("run.conf");
    std::fs::write(&config, "dim=2\nlevels=4\nmu=1\nd11=cell\nprecond=pl-\ntol=1e-8\n").unwrap();
    let out = bin().arg("solve").arg("--config").arg(&config).output().expect("run binary");
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("precond=pl-"), "config not applied: {stdout}");
    assert!(stdout.contains("iterations="));

    // CLI flag overrides the file.
    let out = bin()
        .arg("solve")
        .arg("--config")
        .arg(&config)
        .args(["--precond", "pd"])
        .output()
        .expect("run binary");
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("precond=pd"));
}

#[test]
fn bad_flags_exit_nonzero() {
    let out = bin().args(["solve", "--dim", "5"]).output().expect("run binary");
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["solve", "--precond", "xyz"]).output().expect("run binary");
    assert_eq!(out.status.code(), Some(1));
}
