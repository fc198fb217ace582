fn main() -> std::process::ExitCode {
    partwhole::cli::main()
}
