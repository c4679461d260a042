//! The JSON API, driven in-process through the router.

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use kgame_arena::server::router;
use kgame_core::planarity::is_planar;

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(b.to_string()))
            .unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

fn edges(snapshot: &Value) -> Vec<(usize, usize)> {
    serde_json::from_value(snapshot["edges"].clone()).unwrap()
}

#[tokio::test]
async fn health() {
    let app = router(None);
    let (status, body) = call(&app, Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, json!({ "ok": true }));
}

#[tokio::test]
async fn full_game_against_planar_engine() {
    let app = router(None);
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/games",
        Some(json!({ "k": 3, "n": 12, "engine": "planar", "human_first": true, "seed": 1 })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let id = body["game_id"].as_u64().unwrap();
    assert_eq!(body["snapshot"]["turn"], 0);
    assert_eq!(body["snapshot"]["human"], "A");

    // An illegal move is rejected with a reason and changes nothing.
    let uri = format!("/api/games/{id}/moves");
    let (status, body) = call(&app, Method::POST, &uri, Some(json!({ "u": 4, "v": 4 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["accepted"], false);
    assert_eq!(body["reason"], "self-loop");
    assert_eq!(body["snapshot"]["turn"], 0);

    // Play the lexicographically first open pair until the game ends.
    let mut last = body["snapshot"].clone();
    while last["over"] == false {
        let deficits: Vec<usize> = serde_json::from_value(last["deficits"].clone()).unwrap();
        let taken = edges(&last);
        let open: Vec<usize> = (0..deficits.len()).filter(|&v| deficits[v] > 0).collect();
        let (u, v) = open
            .iter()
            .flat_map(|&u| open.iter().map(move |&v| (u, v)))
            .find(|&(u, v)| u < v && !taken.contains(&(u, v)))
            .unwrap();
        let (status, body) = call(&app, Method::POST, &uri, Some(json!({ "u": u, "v": v }))).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["accepted"], true, "{body}");
        let (_, fetched) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
        assert_eq!(fetched, body["snapshot"]);
        assert_eq!(fetched["condition_t"], true);
        last = fetched;
    }
    assert_eq!(last["planar"], true);
    assert!(is_planar(&edges(&last), 12));

    let (status, body) = call(&app, Method::POST, &uri, Some(json!({ "u": 0, "v": 1 }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["reason"], "game over");

    let (status, _) = call(&app, Method::DELETE, &format!("/api/games/{id}"), None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::DELETE, &format!("/api/games/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn engine_moves_first_when_human_is_second() {
    let app = router(None);
    let (status, body) = call(
        &app,
        Method::POST,
        "/api/games",
        Some(json!({ "k": 4, "n": 40, "engine": "minor", "ell": 3 })),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    let snap = &body["snapshot"];
    assert_eq!(snap["turn"], 1);
    assert_eq!(snap["human"], "B");
    assert_eq!(snap["engine"], "minor:3");
    assert_eq!(snap["condition_t"], Value::Null);
    let id = body["game_id"].as_u64().unwrap();
    let (_, body) = call(&app, Method::POST, &format!("/api/games/{id}/moves"), Some(json!({ "u": 0, "v": 1 }))).await;
    assert_eq!(body["accepted"], false);
    assert_eq!(body["reason"], "adjacent");
}

#[tokio::test]
async fn bad_requests() {
    let app = router(None);
    for req in [
        json!({ "k": 3, "n": 12, "engine": "minor" }),
        json!({ "k": 4, "n": 12, "engine": "planar" }),
        json!({ "k": 3, "n": 12, "engine": "nonsense" }),
        json!({ "k": 3, "n": 2_000_000, "engine": "random" }),
    ] {
        let (status, body) = call(&app, Method::POST, "/api/games", Some(req.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{req}");
        assert!(body["error"].is_string());
    }
    let (status, _) = call(&app, Method::GET, "/api/games/99", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::POST, "/api/games/99/moves", Some(json!({ "u": 0, "v": 1 }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn serves_static_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>board</h1>").unwrap();
    let app = router(Some(dir.path().to_path_buf()));
    let (status, body) = call(&app, Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, "<h1>board</h1>");
    let (status, _) = call(&app, Method::GET, "/missing.js", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
}
