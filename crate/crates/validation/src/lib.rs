//! Holds the `acceptance` test target, which checks `optomech-core` end to
//! end and prints one PASS/FAIL line per criterion. It lives in its own
//! package so the run comes after the core test suites in a workspace test.
