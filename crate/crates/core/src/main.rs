fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPECTRA_LOG", "warn")).init();
    std::process::exit(spectra::cli::run(std::env::args_os()));
}
