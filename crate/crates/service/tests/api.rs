use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;
use ucme_core::floorplan::geometry::is_simple_ring;
use ucme_core::floorplan::Point;

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => request.header("content-type", "application/json").body(Body::from(b.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn wait_for(app: &Router, id: &str, status: &str) -> Value {
    let deadline = Instant::now() + Duration::from_secs(300);
    loop {
        let (code, body) = call(app, "GET", &format!("/sessions/{id}"), None).await;
        assert_eq!(code, StatusCode::OK);
        if body["status"] == status {
            return body;
        }
        assert_ne!(body["status"], "failed", "{body}");
        assert!(Instant::now() < deadline, "timed out waiting for {status}: {body}");
        tokio::time::sleep(Duration::from_millis(50)).await;
    }
}

fn small_config(evals_per_selection: u64) -> Value {
    json!({
        "config": {
            "initial_population": 20,
            "warmup_coverage": 0.001,
            "evals_per_selection": evals_per_selection,
            "seed": 7
        },
        "das": "corners"
    })
}

#[tokio::test]
async fn malformed_spec_names_the_field() {
    let app = ucme_service::app();
    let spec = json!({
        "bounds": { "width": 10.0, "height": 10.0 },
        "units": [{ "id": 1, "name": "Room", "kind": "interior", "area": 10 }],
        "adjacencies": [[1, 11]]
    });
    let (code, body) = call(&app, "POST", "/sessions", Some(json!({ "spec": spec }))).await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "invalid_spec");
    assert_eq!(body["field"], "adjacencies[0][1]");
}

#[tokio::test]
async fn invalid_config_and_bodies_are_rejected() {
    let app = ucme_service::app();
    let (code, body) = call(&app, "POST", "/sessions", Some(json!({ "config": { "window_size": 8 } }))).await;
    assert_eq!(code, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["code"], "invalid_config");
    let (code, body) = call(&app, "POST", "/sessions", Some(json!({ "das": "diagonal" }))).await;
    assert_eq!(code, StatusCode::BAD_REQUEST);
    assert_eq!(body["code"], "bad_request");
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let app = ucme_service::app();
    let id = "00000000-0000-4000-8000-000000000000";
    for uri in [format!("/sessions/{id}"), format!("/sessions/{id}/alternatives"), format!("/sessions/{id}/archive")] {
        let (code, body) = call(&app, "GET", &uri, None).await;
        assert_eq!(code, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(body["code"], "not_found");
    }
}

#[tokio::test]
async fn full_selection_cycle() {
    let app = ucme_service::app();
    let (code, created) = call(&app, "POST", "/sessions", Some(small_config(1_500))).await;
    assert_eq!(code, StatusCode::CREATED);
    assert_eq!(created["status"], "initializing");
    let id = created["id"].as_str().unwrap().to_string();

    let ready = wait_for(&app, &id, "awaiting_selection").await;
    assert_eq!(ready["window"]["size"], 9);

    let (code, batch) = call(&app, "GET", &format!("/sessions/{id}/alternatives"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(batch["das"], "corners");
    let alternatives = batch["alternatives"].as_array().unwrap();
    assert!((1..=4).contains(&alternatives.len()));
    let mut cells: Vec<String> = alternatives.iter().map(|a| a["cell"].to_string()).collect();
    cells.dedup();
    assert_eq!(cells.len(), alternatives.len());
    for alt in alternatives {
        let rooms = alt["geometry"]["rooms"].as_array().unwrap();
        assert!(!rooms.is_empty());
        for room in rooms {
            for ring in room["rings"].as_array().unwrap() {
                let ring: Vec<Point> = serde_json::from_value(ring.clone()).unwrap();
                assert!(ring.len() >= 3 && is_simple_ring(&ring));
            }
        }
    }

    let (code, resampled) = call(&app, "GET", &format!("/sessions/{id}/alternatives?das=edges"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(resampled["das"], "edges");
    let chosen = resampled["alternatives"][0].clone();

    let selection = format!("/sessions/{id}/selection");
    let (code, body) = call(&app, "POST", &selection, Some(json!({ "alt_id": 99 }))).await;
    assert_eq!(code, StatusCode::NOT_FOUND, "{body}");

    let (code, body) = call(&app, "POST", &selection, Some(json!({ "alt_id": 0 }))).await;
    assert_eq!(code, StatusCode::ACCEPTED);
    assert_eq!(body["status"], "evolving");
    let (code, _) = call(&app, "POST", &selection, Some(json!({ "alt_id": 0 }))).await;
    assert_eq!(code, StatusCode::CONFLICT);
    let (code, body) = call(&app, "GET", &format!("/sessions/{id}/alternatives"), None).await;
    assert_eq!(code, StatusCode::CONFLICT);
    assert_eq!(body["code"], "conflict");

    let after = wait_for(&app, &id, "awaiting_selection").await;
    assert_eq!(after["selections"], 1);
    let evolved = after["evaluations"].as_u64().unwrap() - ready["evaluations"].as_u64().unwrap();
    assert_eq!(evolved, 1_500);

    let (code, view) = call(&app, "GET", &format!("/sessions/{id}/archive?which=feasible"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(view["resolution"], 64);
    let (col, row) = (chosen["cell"]["col"].as_u64().unwrap(), chosen["cell"]["row"].as_u64().unwrap());
    let (ox, oy) = (view["window"]["origin"]["col"].as_u64().unwrap(), view["window"]["origin"]["row"].as_u64().unwrap());
    assert!(ox <= col && col < ox + 9 && oy <= row && row < oy + 9, "window moved onto the choice");
    assert!(ox <= 55 && oy <= 55);

    let (code, infeasible) = call(&app, "GET", &format!("/sessions/{id}/archive?which=infeasible"), None).await;
    assert_eq!(code, StatusCode::OK);
    for q in infeasible["quality"].as_array().unwrap().iter().flat_map(|r| r.as_array().unwrap()) {
        if let Some(q) = q.as_f64() {
            assert!((0.0..1.0 + 1e-12).contains(&q));
        }
    }

    let (code, history) = call(&app, "GET", &format!("/sessions/{id}/history"), None).await;
    assert_eq!(code, StatusCode::OK);
    assert_eq!(history.as_array().unwrap().len(), 1);
    assert_eq!(history[0]["das"], "edges");
    assert_eq!(history[0]["chosen"]["cell"], chosen["cell"]);

    let (code, log) = call(&app, "GET", &format!("/sessions/{id}/export"), None).await;
    assert_eq!(code, StatusCode::OK);
    let log: ucme_core::metrics::RunLog = serde_json::from_value(log).unwrap();
    assert_eq!(log.selections.len(), 1);
    assert_eq!(log.config.driver, ucme_core::metrics::Driver::Human);
    assert!(log.snapshots.windows(2).all(|w| w[0].evals < w[1].evals));
}
