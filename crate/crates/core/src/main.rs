fn main() {
    std::process::exit(roadwatch::cli::run(std::env::args_os()));
}
