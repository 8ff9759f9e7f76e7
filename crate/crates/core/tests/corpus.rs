use std::path::PathBuf;

use eo_core::concrete::{parse_program, AnyProgram};
use eo_core::context::{EconCtx, ImpCtx};
use eo_core::econ::econ_check;
use eo_core::elaborate::elaborate_closed;
use eo_core::impartial;
use eo_core::types::Valueness::{self, Top, Val};
use eo_core::verify::Subject;

fn load(name: &str) -> AnyProgram {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.eo"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_program(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Every corpus file with the valuenesses its main judgment derives.
const EXPECTED: &[(&str, &[Valueness])] = &[
    ("apply_by_value", &[Top]),
    ("choose", &[Top]),
    ("identity", &[Val]),
    ("identity_by_name", &[Top]),
    ("identity_by_value", &[Top]),
    ("ignore_divergence", &[Top]),
    ("map_by_value", &[Top]),
    ("map_econ", &[Val]),
    ("map_impartial", &[Val]),
    ("map_stream", &[Top]),
    ("project", &[Top]),
    ("stream_even", &[Val]),
    ("stream_odd", &[Val]),
    ("stream_odd_pair", &[Val]),
    ("tree", &[Val]),
];

#[test]
fn every_file_is_listed() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path().file_stem().unwrap().to_string_lossy().into_owned())
        .collect();
    names.sort();
    let listed: Vec<&str> = EXPECTED.iter().map(|(n, _)| *n).collect();
    assert_eq!(names, listed);
}

#[test]
fn programs_print_and_parse_back() {
    for (name, _) in EXPECTED {
        let (header, printed) = match load(name) {
            AnyProgram::Impartial(p) => ("impartial", format!("({} : {})", p.expr, p.ty)),
            AnyProgram::Econ(p) => ("econ", format!("({} : {})", p.expr, p.ty)),
        };
        let again = parse_program(&format!("#lang {header}\n{printed}")).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        match (load(name), again) {
            (AnyProgram::Impartial(a), AnyProgram::Impartial(b)) => assert!(a.expr == b.expr && a.ty == b.ty, "{name}"),
            (AnyProgram::Econ(a), AnyProgram::Econ(b)) => assert!(a.expr == b.expr && a.ty == b.ty, "{name}"),
            _ => panic!("{name} changed language"),
        }
    }
}

#[test]
fn programs_typecheck_with_expected_valueness() {
    for (name, want) in EXPECTED {
        let got = match load(name) {
            AnyProgram::Impartial(p) => impartial::check(&ImpCtx::empty(), &p.expr, &p.ty).map(|r| r.found.valuenesses()),
            AnyProgram::Econ(p) => econ_check(&EconCtx::empty(), &p.expr, &p.ty).map(|r| r.found.valuenesses()),
        };
        let got = got.unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(&got, want, "{name}");
    }
}

#[test]
fn impartial_programs_economize_at_the_same_valueness() {
    for (name, want) in EXPECTED {
        let s = Subject::from_program(name, &load(name));
        let got = econ_check(&EconCtx::empty(), &s.expr, &s.ty).unwrap_or_else(|e| panic!("{name}: {e}"));
        for p in *want {
            assert!(got.found.valuenesses().contains(p), "{name}");
        }
    }
}

#[test]
fn ignoring_an_argument_suspends_it() {
    let s = Subject::from_program("ignore_divergence", &load("ignore_divergence"));
    let (_, r) = elaborate_closed(&s.expr, &s.ty).unwrap().remove(0);
    assert_eq!(r.term.to_string(), "(\\x. ()) (thunk (fix u. u))");
}

#[test]
fn by_value_application_elaborates_without_thunks() {
    let s = Subject::from_program("apply_by_value", &load("apply_by_value"));
    let (_, r) = elaborate_closed(&s.expr, &s.ty).unwrap().remove(0);
    assert_eq!(r.term.to_string(), "(\\x. x) ()");
}
