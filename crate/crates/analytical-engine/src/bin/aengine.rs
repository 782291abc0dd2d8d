fn main() {
    std::process::exit(analytical_engine::cli::run_main(std::env::args_os()));
}
