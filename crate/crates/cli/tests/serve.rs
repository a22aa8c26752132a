use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use patternforge_cli::serve::{router, AppState};
use patternforge_core::pipeline::identity_values;
use patternforge_core::{parse_template, templates, PatternSpec};
use serde_json::{json, Value};
use tower::ServiceExt;

fn app(save_dir: &std::path::Path) -> Router {
    let state = AppState::new(templates::pants(), templates::mannequin(), 6.0, save_dir.to_path_buf());
    router(Arc::new(state))
}

async fn call(app: &Router, method: &str, uri: &str, body: &str) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .header("origin", "http://localhost:5173")
        .body(Body::from(body.to_string()))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    assert_eq!(resp.headers().get("access-control-allow-origin").map(|v| v.to_str().unwrap()), Some("*"));
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

#[tokio::test]
async fn template_lists_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let (status, doc) = call(&app(dir.path()), "GET", "/template", "").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["parameters"].as_object().unwrap().len(), 3);
    let back = parse_template(&doc.to_string()).unwrap();
    assert_eq!(back, templates::pants());
}

#[tokio::test]
async fn identity_pattern_is_the_base() {
    let dir = tempfile::tempdir().unwrap();
    let t = templates::pants();
    let body = json!({ "values": identity_values(&t) }).to_string();
    let (status, out) = call(&app(dir.path()), "POST", "/pattern", &body).await;
    assert_eq!(status, StatusCode::OK, "{out}");
    let p: PatternSpec = serde_json::from_value(out["pattern"].clone()).unwrap();
    assert_eq!(p, t.pattern);
    let lines = out["polylines"].as_object().unwrap();
    assert_eq!(lines.len(), t.pattern.panels.len());
    for panel in &t.pattern.panels {
        let edges = lines[&panel.name].as_array().unwrap();
        assert_eq!(edges.len(), panel.edges.len());
        // Each polyline starts at its edge's first vertex.
        for (e, line) in panel.edges.iter().zip(edges) {
            let v = panel.vertices[e.endpoints[0]];
            let first = &line[0];
            assert!((first[0].as_f64().unwrap() - v.x).abs() < 1e-12);
            assert!((first[1].as_f64().unwrap() - v.y).abs() < 1e-12);
        }
    }
    assert_eq!(out["self_intersecting"], json!([]));
}

#[tokio::test]
async fn bad_requests_answer_400() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    for (uri, body) in [
        ("/pattern", "{\"values\": "),
        ("/pattern", "{\"values\": {\"nope\": 1.0}}"),
        ("/pattern", "{\"values\": [1, 2]}"),
        ("/sample", "{\"seed\": -1}"),
        ("/drape", "{\"sim\": {\"time_step\": 0}}"),
        ("/drape", "{\"sim\": {\"warp\": 9}}"),
        ("/scan", "{}"),
        ("/scan", "{\"mesh\": {\"vertices\": [[0,0,0]], \"triangles\": [[0,1,2]], \"labels\": [\"a\"]}}"),
    ] {
        let (status, out) = call(&app, "POST", uri, body).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{uri} {body}: {out}");
        assert!(out["message"].is_string());
    }
    let (status, _) = call(&app, "POST", "/scan", "{\"mesh_id\": \"0000\"}").await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn degenerate_values_answer_422() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let t = templates::pants();
    let mut values = identity_values(&t);
    let first = values.keys().next().unwrap().clone();
    // Collapse every edge the first rule touches.
    values.insert(first, -1e9);
    let body = json!({ "values": values }).to_string();
    for uri in ["/pattern", "/drape", "/save"] {
        let (status, out) = call(&app, "POST", uri, &body).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{uri}: {out}");
    }
    assert!(std::fs::read_dir(dir.path()).map(|d| d.count() == 0).unwrap_or(true));
}

#[tokio::test]
async fn sampling_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, a) = call(&app, "POST", "/sample", "{\"seed\": 5}").await;
    assert_eq!(status, StatusCode::OK, "{a}");
    let (_, b) = call(&app, "POST", "/sample", "{\"seed\": 5}").await;
    assert_eq!(a, b);
    let (_, c) = call(&app, "POST", "/sample", "").await;
    assert_ne!(a["values"], c["values"]);
    assert_eq!(c["seed"], 0);
}

#[tokio::test]
async fn drape_then_scan_never_adds_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (status, d) = call(&app, "POST", "/drape", "{\"sim\": {\"max_frames\": 40}}").await;
    assert_eq!(status, StatusCode::OK, "{}", d["message"]);
    let n = d["vertices"].as_array().unwrap().len();
    assert_eq!(d["labels"].as_array().unwrap().len(), n);
    assert!(d["report"]["frames_run"].as_u64().unwrap() <= 40);

    let body = json!({ "mesh_id": d["mesh_id"], "rays_per_face": 8 }).to_string();
    let (status, s) = call(&app, "POST", "/scan", &body).await;
    assert_eq!(status, StatusCode::OK, "{s}");
    assert!(s["vertices"].as_array().unwrap().len() <= n);

    // Same mesh sent inline gives the same answer.
    let inline = json!({
        "mesh": { "vertices": d["vertices"], "triangles": d["triangles"], "labels": d["labels"] },
        "rays_per_face": 8,
    })
    .to_string();
    let (status, s2) = call(&app, "POST", "/scan", &inline).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(s, s2);
}

#[tokio::test]
async fn save_writes_numbered_specs() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let t = templates::pants();
    let mut paths = Vec::new();
    for _ in 0..2 {
        let (status, out) = call(&app, "POST", "/save", &json!({ "values": identity_values(&t) }).to_string()).await;
        assert_eq!(status, StatusCode::OK, "{out}");
        paths.push(out["path"].as_str().unwrap().to_string());
    }
    assert_ne!(paths[0], paths[1]);
    assert!(paths[0].contains("sample_00000") && paths[1].contains("sample_00001"));
    let saved = parse_template(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(saved.pattern, t.pattern);
    assert_eq!(saved.sample.unwrap().values, identity_values(&t));
}
