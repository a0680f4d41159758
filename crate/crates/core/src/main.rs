fn main() {
    std::process::exit(qfrob::cli::run(std::env::args_os()));
}
