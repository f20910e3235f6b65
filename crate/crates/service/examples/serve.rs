//! Run the HTTP service.
//!
//! `STROKEFORGE_ADDR=127.0.0.1:8787 STROKEFORGE_DATA_DIR=./data cargo run --release --example serve`

#[tokio::main]
async fn main() {
    let settings = strokeforge_service::Settings::from_env().unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2);
    });
    println!("listening on http://{}", settings.addr);
    if let Err(e) = strokeforge_service::serve(settings).await {
        eprintln!("{e}");
        std::process::exit(2);
    }
}
