use std::fs;
use std::path::PathBuf;

use nslimit_core::corpus::{minimal_corpus, CorpusSpec};
use nslimit_core::dsl::{emit_model, parse_model};
use nslimit_core::model::is_isomorphic;
use nslimit_core::reduction::minimal_snc_model;
use nslimit_core::DualGraphModel;

const MARKED: &str = "model {
  m = 3
  vertex C { genus = 2 }
  vertex T { genus = 0 }
  edge C -- T
  mark P on T coeff 2 at x
  mark Q on T coeff 1 at x
  mark R on C coeff 2
}";

fn shipped_models() -> Vec<DualGraphModel> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models");
    let mut paths: Vec<_> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| parse_model(&fs::read_to_string(p).unwrap()).unwrap().model).collect()
}

fn corpus() -> Vec<DualGraphModel> {
    let mut models = shipped_models();
    models.push(parse_model(MARKED).unwrap().model);
    for m in shipped_models() {
        models.push(minimal_snc_model(&m).unwrap().0);
    }
    models.extend(minimal_corpus(2024, 50, &CorpusSpec::default()));
    models
}

#[test]
fn parse_of_emit_is_isomorphic() {
    let models = corpus();
    assert!(models.len() >= 50);
    for model in &models {
        let text = emit_model(model);
        let back = parse_model(&text).unwrap_or_else(|e| panic!("{e}\n{text}")).model;
        assert!(is_isomorphic(model, &back), "{text}");
    }
}

#[test]
fn emit_is_a_fixed_point() {
    for model in corpus() {
        let once = emit_model(&model);
        let twice = emit_model(&parse_model(&once).unwrap().model);
        assert_eq!(once, twice);
    }
}

#[test]
fn merged_marks_keep_their_point() {
    let model = parse_model(MARKED).unwrap().model;
    let back = parse_model(&emit_model(&model)).unwrap().model;
    let t = back.component_by_name("T").unwrap();
    assert_eq!(back.mark_groups(t).len(), 1);
    assert_eq!(back.mark_degree(t), 3);
}

#[test]
fn errors_carry_positions() {
    let err = parse_model("model {\n  m = 2\n  vertex A { genus = one }\n}").unwrap_err();
    assert_eq!(err.0[0].span.line, 3);
    assert!(parse_model("model { m = 2 \n edge A -- B }").is_err());
}
