fn main() {
    std::process::exit(inattention::cli::run(std::env::args_os()));
}
