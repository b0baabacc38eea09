use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use blindseq_core::{normalize_draw, risk_tolerant_table, AdviseOptions, GameState, Ranking};
use blindseq_service::{router, AppState, ServiceConfig};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app_with(config: ServiceConfig) -> Router {
    router(Arc::new(AppState::new(config)))
}

fn app() -> Router {
    app_with(ServiceConfig {
        grid_samples: 2_000,
        ..Default::default()
    })
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or(Body::empty(), |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
    (status, value)
}

async fn create(app: &Router, body: Value) -> String {
    let (status, doc) = call(app, Method::POST, "/api/games", Some(body)).await;
    assert_eq!(status, StatusCode::CREATED, "{doc}");
    doc["id"].as_str().unwrap().to_string()
}

async fn draw(app: &Router, id: &str, value: i64) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/api/games/{id}/draws"), Some(json!({ "value": value }))).await
}

async fn place(app: &Router, id: &str, slot: usize) -> (StatusCode, Value) {
    call(app, Method::POST, &format!("/api/games/{id}/placements"), Some(json!({ "slot": slot }))).await
}

#[tokio::test]
async fn create_list_and_grid_games() {
    let app = app();
    let (status, doc) = call(&app, Method::POST, "/api/games", Some(json!({"variant": "list", "n": 20, "strategy": "rt"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(doc["game"]["slots"].as_array().unwrap().len(), 20);
    assert!(doc["game"]["slots"].as_array().unwrap().iter().all(Value::is_null));
    assert_eq!(doc["boundaries"].as_array().unwrap().len(), 21);
    assert_eq!(doc["strategy"], "rt");
    assert_eq!(doc["status"], "InProgress");

    let (status, doc) = call(&app, Method::POST, "/api/games", Some(json!({"variant": "grid", "m": 5}))).await;
    assert_eq!(status, StatusCode::CREATED);
    let cells: usize = doc["grid"]["cells"].as_array().unwrap().iter().map(|r| r.as_array().unwrap().len()).sum();
    assert_eq!(cells, 25);
    let (status, _) = call(&app, Method::POST, "/api/grids", Some(json!({"m": 3}))).await;
    assert_eq!(status, StatusCode::CREATED);

    for bad in [json!({"n": 0}), json!({"n": 65}), json!({"variant": "grid", "m": 9}), json!({"n": 5, "strategy": "zz"}), json!({})] {
        let (status, err) = call(&app, Method::POST, "/api/games", Some(bad.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
        assert_eq!(err["code"], "bad_request");
        assert!(err["message"].is_string());
    }
    let req = Request::post("/api/games").body(Body::from("{not json")).unwrap();
    assert_eq!(app.clone().oneshot(req).await.unwrap().status(), StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn replays_a_midgame_position() {
    let app = app();
    let id = create(&app, json!({"n": 20, "strategy": "rt"})).await;
    for (value, slot) in [(130, 3), (573, 12), (761, 16)] {
        let (status, resp) = draw(&app, &id, value).await;
        assert_eq!(status, StatusCode::OK);
        assert!(resp["feasible_slots"].as_array().unwrap().contains(&json!(slot)));
        let (status, _) = place(&app, &id, slot).await;
        assert_eq!(status, StatusCode::OK);
    }
    let (status, resp) = draw(&app, &id, 170).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resp["eliminated"], false);
    assert_eq!(resp["feasible_slots"], json!([4, 5, 6, 7, 8, 9, 10, 11]));
    let top = &resp["recommendations"][0];
    assert_eq!(top["slot"], 5);
    assert_eq!(top["rank"], 1);
    let win = top["win_prob"].as_f64().unwrap();
    assert!((win / 1.28e-4 - 1.0).abs() < 0.10, "{win}");

    // parity with the library on the same position
    let (_, probs) = risk_tolerant_table(64).unwrap();
    let mut game = GameState::new(20).unwrap();
    for (value, slot) in [(130, 3), (573, 12), (761, 16)] {
        game.place(slot, normalize_draw(value).unwrap()).unwrap();
    }
    let direct = game
        .advise_with(normalize_draw(170).unwrap(), &probs, AdviseOptions { ranking: Ranking::WinProb, ..Default::default() })
        .unwrap();
    let recs = resp["recommendations"].as_array().unwrap();
    assert_eq!(recs.len(), direct.len());
    for (got, want) in recs.iter().zip(&direct) {
        assert_eq!(got["slot"], want.slot);
        assert_eq!(got["rank"], want.rank);
        let w = got["win_prob"].as_f64().unwrap();
        assert!((w - want.win_prob).abs() <= 1e-12 * want.win_prob.abs().max(1e-300));
    }
}

#[tokio::test]
async fn equal_spacing_sessions_rank_greedily() {
    let app = app();
    let id = create(&app, json!({"n": 20, "strategy": "es"})).await;
    for (value, slot) in [(130, 3), (573, 12), (761, 16)] {
        draw(&app, &id, value).await;
        place(&app, &id, slot).await;
    }
    let (_, resp) = draw(&app, &id, 170).await;
    assert_eq!(resp["recommendations"][0]["slot"], 4);
}

#[tokio::test]
async fn first_draw_of_a_three_game() {
    let app = app();
    let id = create(&app, json!({"n": 3, "strategy": "rt"})).await;
    let (_, resp) = draw(&app, &id, 300).await;
    assert_eq!(resp["recommendations"][0]["slot"], 2);
    assert_eq!(resp["normalized"], 0.3005);
}

#[tokio::test]
async fn duplicates_eliminate_and_lock_the_session() {
    let app = app();
    let id = create(&app, json!({"n": 5})).await;
    draw(&app, &id, 400).await;
    place(&app, &id, 3).await;
    let (status, resp) = draw(&app, &id, 400).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resp["eliminated"], true);
    assert_eq!(resp["recommendations"], json!([]));
    assert_eq!(resp["status"], "Eliminated");
    let (status, err) = draw(&app, &id, 100).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["code"], "conflict");
    let (_, doc) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
    assert_eq!(doc["status"], "Eliminated");
    assert_eq!(doc["win_prob"], 0.0);
    assert_eq!(doc["draws"], json!([400, 400]));
}

#[tokio::test]
async fn placements_allow_overrides_and_reject_bad_slots() {
    let app = app();
    let id = create(&app, json!({"n": 3, "strategy": "rt"})).await;
    let (status, _) = place(&app, &id, 1).await;
    assert_eq!(status, StatusCode::CONFLICT, "no pending draw");

    let (_, resp) = draw(&app, &id, 500).await;
    let second = resp["recommendations"][1]["slot"].as_u64().unwrap() as usize;
    let (status, _) = draw(&app, &id, 600).await;
    assert_eq!(status, StatusCode::CONFLICT, "draw still pending");
    let (status, doc) = place(&app, &id, second).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["game"]["slots"][second - 1], 0.5005);

    assert_eq!(second, 3);
    draw(&app, &id, 100).await;
    let (status, _) = place(&app, &id, 3).await;
    assert_eq!(status, StatusCode::CONFLICT);
    let (status, _) = call(&app, Method::POST, &format!("/api/games/{id}/placements"), Some(json!({"row": 1, "col": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (_, doc) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
    assert_eq!(doc["pending_draw"]["raw"], 100);
}

#[tokio::test]
async fn filling_the_last_slot_wins() {
    let app = app();
    let id = create(&app, json!({"n": 2, "strategy": "es"})).await;
    draw(&app, &id, 100).await;
    place(&app, &id, 1).await;
    draw(&app, &id, 900).await;
    let (status, doc) = place(&app, &id, 2).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["status"], "Won");
    assert_eq!(doc["win_prob"], 1.0);
    let (status, _) = draw(&app, &id, 5).await;
    assert_eq!(status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn autoplace_commits_the_top_slot() {
    let app = app();
    let id = create(&app, json!({"n": 3, "strategy": "rt"})).await;
    let (status, resp) = call(&app, Method::POST, &format!("/api/games/{id}/draws?autoplace=true"), Some(json!({"value": 300}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resp["autoplaced"], json!({"slot": 2}));
    let (_, doc) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
    assert_eq!(doc["game"]["slots"][1], 0.3005);
    assert_eq!(doc["pending_draw"], Value::Null);
}

#[tokio::test]
async fn reads_and_lookups() {
    let app = app();
    let id = create(&app, json!({"n": 20, "strategy": "rt"})).await;
    let uri = format!("/api/games/{id}");
    let (status, first) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(status, StatusCode::OK);
    let p = first["win_prob"].as_f64().unwrap();
    assert!((1.0 / p / 7980.0 - 1.0).abs() < 0.005);
    let (_, second) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(first, second);

    let (status, _) = call(&app, Method::GET, "/api/games/00000000-0000-0000-0000-000000000000", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = call(&app, Method::GET, "/api/games/not-a-uuid", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = draw(&app, "00000000-0000-0000-0000-000000000000", 3).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let (status, _) = call(&app, Method::DELETE, &uri, None).await;
    assert_eq!(status, StatusCode::NO_CONTENT);
    let (status, _) = call(&app, Method::GET, &uri, None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn bad_draw_values() {
    let app = app();
    let id = create(&app, json!({"n": 4})).await;
    for bad in [json!({"value": 1000}), json!({"value": -1}), json!({"value": "x"})] {
        let (status, _) = call(&app, Method::POST, &format!("/api/games/{id}/draws"), Some(bad)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST);
    }
}

#[tokio::test]
async fn sessions_are_isolated() {
    let app = app();
    let a = create(&app, json!({"n": 4})).await;
    let b = create(&app, json!({"n": 4})).await;
    draw(&app, &a, 100).await;
    draw(&app, &b, 800).await;
    place(&app, &a, 1).await;
    place(&app, &b, 4).await;
    let (_, da) = call(&app, Method::GET, &format!("/api/games/{a}"), None).await;
    let (_, db) = call(&app, Method::GET, &format!("/api/games/{b}"), None).await;
    assert_eq!(da["game"]["slots"], json!([0.1005, null, null, null]));
    assert_eq!(db["game"]["slots"], json!([null, null, null, 0.8005]));
}

#[tokio::test]
async fn concurrent_requests_on_many_sessions() {
    let app = app();
    let mut ids = Vec::new();
    for _ in 0..16 {
        ids.push(create(&app, json!({"n": 10})).await);
    }
    let tasks: Vec<_> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let (app, id) = (app.clone(), id.clone());
            tokio::spawn(async move {
                let uri = format!("/api/games/{id}/draws?autoplace=true");
                call(&app, Method::POST, &uri, Some(json!({"value": 10 + i as i64}))).await
            })
        })
        .collect();
    for t in tasks {
        assert_eq!(t.await.unwrap().0, StatusCode::OK);
    }
    for (i, id) in ids.iter().enumerate() {
        let (_, doc) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
        assert_eq!(doc["draws"], json!([10 + i as i64]));
    }
}

#[tokio::test]
async fn expiry_and_capacity() {
    let app = app_with(ServiceConfig { ttl: Duration::ZERO, ..Default::default() });
    let id = create(&app, json!({"n": 4})).await;
    let (status, _) = call(&app, Method::GET, &format!("/api/games/{id}"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);

    let app = app_with(ServiceConfig { max_sessions: 1, ..Default::default() });
    create(&app, json!({"n": 4})).await;
    let (status, err) = call(&app, Method::POST, "/api/games", Some(json!({"n": 4}))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(err["code"], "unavailable");
}

#[tokio::test]
async fn grid_sessions() {
    let app = app();
    let (_, doc) = call(&app, Method::POST, "/api/grids", Some(json!({"m": 2}))).await;
    let id = doc["id"].as_str().unwrap().to_string();
    let base = format!("/api/grids/{id}");
    let (status, resp) = call(&app, Method::POST, &format!("{base}/draws"), Some(json!({"value": 100}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(resp["recommendations"][0]["cell"], json!({"row": 1, "col": 1}));
    assert_eq!(resp["heatmap"].as_array().unwrap().len(), 2);
    let (status, _) = call(&app, Method::POST, &format!("{base}/placements"), Some(json!({"slot": 1}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, doc) = call(&app, Method::POST, &format!("{base}/placements"), Some(json!({"row": 1, "col": 1}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(doc["grid"]["cells"][0][0], 0.1005);
    assert!(doc.get("win_prob").is_none());

    // 0.05 cannot go anywhere below-right of 0.1005
    let (_, resp) = call(&app, Method::POST, &format!("{base}/draws"), Some(json!({"value": 50}))).await;
    assert_eq!(resp["eliminated"], true);
    let (_, doc) = call(&app, Method::GET, &base, None).await;
    assert_eq!(doc["status"], "Eliminated");
}

#[tokio::test]
async fn grid_win() {
    let app = app();
    let (_, doc) = call(&app, Method::POST, "/api/grids", Some(json!({"m": 1}))).await;
    let id = doc["id"].as_str().unwrap();
    let (_, resp) = call(&app, Method::POST, &format!("/api/grids/{id}/draws?autoplace=true"), Some(json!({"value": 7}))).await;
    assert_eq!(resp["autoplaced"], json!({"row": 1, "col": 1}));
    assert_eq!(resp["status"], "Won");
}

#[tokio::test]
async fn cors_headers_are_permissive() {
    let app = app();
    let req = Request::builder()
        .method(Method::GET)
        .uri("/health")
        .header("origin", "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
}
