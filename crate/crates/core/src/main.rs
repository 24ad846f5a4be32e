fn main() {
    std::process::exit(tsl::cli::run(std::env::args_os()));
}
