//! Upload an image, submit a job, follow its event stream and fetch the spline, all in process.
//!
//! `cargo run --release --example api_roundtrip`

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use strokeforge::image_io::GrayImage;
use strokeforge_service::{router, AppState, Store};
use tower::ServiceExt;

async fn call(app: &axum::Router, req: Request<Body>) -> (StatusCode, Vec<u8>) {
    let res = app.clone().oneshot(req).await.unwrap();
    let status = res.status();
    (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
}

#[tokio::main]
async fn main() {
    let app = router(AppState::new(Store::in_memory()));

    let png = GrayImage::from_fn(96, 96, |_, y| if (y as f64 - 48.5).abs() < 6.0 { 0.0 } else { 1.0 })
        .unwrap()
        .to_png_bytes()
        .unwrap();
    let (status, body) = call(&app, Request::post("/images").body(Body::from(png)).unwrap()).await;
    let image: Value = serde_json::from_slice(&body).unwrap();
    println!("POST /images -> {status} {image}");

    let job = json!({
        "image_id": image["id"],
        "points": [{"x": 10.0, "y": 48.5}, {"x": 85.0, "y": 48.5}],
        "params": {"descent": {"max_iterations": 6}},
    });
    let req = Request::post("/jobs")
        .header("content-type", "application/json")
        .body(Body::from(job.to_string()))
        .unwrap();
    let (status, body) = call(&app, req).await;
    let id = serde_json::from_slice::<Value>(&body).unwrap()["job_id"].as_str().unwrap().to_string();
    println!("POST /jobs -> {status} {id}");

    // The stream ends after the final status event.
    let (_, events) = call(&app, Request::get(format!("/jobs/{id}/events")).body(Body::empty()).unwrap()).await;
    for block in String::from_utf8(events).unwrap().split("\n\n").filter(|b| !b.trim().is_empty()) {
        let mut kind = "";
        let mut data = String::new();
        for line in block.lines() {
            if let Some(v) = line.strip_prefix("event:") {
                kind = v.trim();
            } else if let Some(v) = line.strip_prefix("data:") {
                data.push_str(v.trim());
            }
        }
        let data: Value = serde_json::from_str(&data).unwrap();
        match kind {
            "iteration" => println!("  iteration {:>2}: F = {:.2}", data["iteration"], data["energy"]["f_total"].as_f64().unwrap()),
            _ => println!("  status {}", data["status"]),
        }
    }

    let (status, spline) = call(&app, Request::get(format!("/jobs/{id}/spline.json")).body(Body::empty()).unwrap()).await;
    println!("GET spline.json -> {status}, {} bytes", spline.len());
}
