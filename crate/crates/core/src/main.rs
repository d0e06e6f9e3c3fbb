fn main() {
    std::process::exit(agl_core::cli::run(std::env::args_os()));
}
