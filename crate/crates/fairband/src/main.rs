fn main() {
    // diagnostics (unused-data, extrapolation, bias warnings) go to stderr;
    // RUST_LOG overrides the default level
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    std::process::exit(fairband::cli::run());
}
