fn main() {
    std::process::exit(holodyn::cli::run());
}
