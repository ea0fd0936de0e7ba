//! Operator matrices compared bit-for-bit against checked-in fixtures.
//! Regenerate with `QSTRUCT_BLESS=1 cargo test -p qstruct-core --test golden`.

use qstruct_core::matrix_io::{parse_complex_matrix, write_complex_matrix};
use qstruct_core::second_quant::{build_fock_ops, fermion_fourier, holstein_primakoff, jordan_wigner};
use qstruct_core::CMat;
use std::path::PathBuf;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.txt"))
}

fn check(name: &str, m: &CMat) {
    let path = fixture_path(name);
    let text = write_complex_matrix(m);
    if std::env::var_os("QSTRUCT_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &text).unwrap();
        return;
    }
    let stored = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let parsed = parse_complex_matrix(&stored).unwrap();
    assert_eq!(parsed.shape(), m.shape(), "{name}");
    for (a, b) in parsed.iter().zip(m.iter()) {
        assert!(a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits(), "{name}: {a} vs {b}");
    }
}

#[test]
fn fock_annihilators() {
    for d in 2..=4 {
        check(&format!("fock_a_dim{d}"), &build_fock_ops(d).a);
    }
}

#[test]
fn holstein_primakoff_spins() {
    for (tag, s) in [("half", 0.5), ("one", 1.0), ("three_halves", 1.5)] {
        let dim = (2.0 * s) as usize + 1;
        let ops = holstein_primakoff(s, dim, 1.0).unwrap();
        check(&format!("hp_{tag}_sz"), &ops.sz);
        check(&format!("hp_{tag}_splus"), &ops.s_plus);
    }
}

#[test]
fn jordan_wigner_chains() {
    for n in 1..=2 {
        for (i, op) in jordan_wigner(n).unwrap().iter().enumerate() {
            check(&format!("jw_n{n}_site{i}"), op);
        }
    }
}

#[test]
fn fermion_fourier_modes() {
    for (m, op) in fermion_fourier(2).unwrap().modes.iter().enumerate() {
        check(&format!("fourier_n2_mode{m}"), op);
    }
}
