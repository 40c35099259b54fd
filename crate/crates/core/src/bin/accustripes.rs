fn main() {
    std::process::exit(accustripes::cli::run(std::env::args_os()));
}
