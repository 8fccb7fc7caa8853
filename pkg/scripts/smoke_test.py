"""
Smoke Test Script for Prague Dimension Lab API
Exercises every endpoint against a running server and checks the certificates it returns
"""
import sys
import time

import requests

BASE_URL = "http://localhost:8000"

# Color codes for output
GREEN = '\033[92m'
RED = '\033[91m'
YELLOW = '\033[93m'
BLUE = '\033[94m'
RESET = '\033[0m'


class APITester:
    def __init__(self, base_url: str):
        self.base_url = base_url
        self.test_results = []

    def log(self, message: str, color: str = RESET):
        print(f"{color}{message}{RESET}")

    def test(self, name: str, func):
        """Run a test and track results"""
        self.log(f"\n▶ Testing: {name}", BLUE)
        try:
            func()
            self.log(f"✓ PASSED: {name}", GREEN)
            self.test_results.append((name, True, None))
            return True
        except AssertionError as e:
            self.log(f"✗ FAILED: {name}", RED)
            self.log(f"  Error: {str(e)}", RED)
            self.test_results.append((name, False, str(e)))
            return False
        except Exception as e:
            self.log(f"✗ ERROR: {name}", RED)
            self.log(f"  Exception: {str(e)}", RED)
            self.test_results.append((name, False, str(e)))
            return False

    def assert_equal(self, actual, expected, message=""):
        """Custom assertion with detailed message"""
        if actual != expected:
            raise AssertionError(f"{message}\n  Expected: {expected}\n  Got: {actual}")

    def assert_true(self, condition, message=""):
        if not condition:
            raise AssertionError(message)

    # ========== Partition Tests ==========

    def test_partition(self):
        response = requests.post(
            f"{self.base_url}/partition/",
            json={"n": 60, "p": 0.5, "seed": 1, "params": {"ca": 0.5}},
        )
        self.assert_equal(response.status_code, 200, "Partition request failed")
        body = response.json()
        self.assert_true(body["verification"]["passed"], "Partition did not verify")
        self.log(f"  ✓ {body['verification']['clique_count']} cliques cover the graph")

    def test_partition_rejects_bad_p(self):
        response = requests.post(f"{self.base_url}/partition/", json={"n": 60, "p": 1.5})
        self.assert_equal(response.status_code, 422, "p outside (0, 1] should be rejected")

    # ========== Coloring Tests ==========

    def test_coloring(self):
        response = requests.post(
            f"{self.base_url}/coloring/",
            json={"n": 12, "r": 3, "m": 400, "checkpoints": [0.0, 0.25]},
        )
        self.assert_equal(response.status_code, 200, "Coloring request failed")
        body = response.json()
        self.assert_true(body["verification"]["passed"], "Coloring is not proper")
        self.log(f"  ✓ Palette {body['plan']['q']}, {len(body['run']['snapshots'])} snapshots")

    # ========== Audit Tests ==========

    def test_audit(self):
        spec = {
            "clique_targets": [{"s_size": 1, "j": 2, "samples": 5}],
            "neighborhood_targets": [{"s_size": 1, "samples": 5}],
        }
        response = requests.post(
            f"{self.base_url}/audit/",
            json={"n": 80, "p": 0.5, "params": {"ca": 0.5, "max_rounds": 1}, "spec": spec},
        )
        self.assert_equal(response.status_code, 200, "Audit request failed")
        self.assert_equal(len(response.json()["rows"]), 2, "Expected one row per target")

    # ========== Prague Tests ==========

    def test_prague(self):
        response = requests.post(
            f"{self.base_url}/prague/",
            json={"n": 32, "p": 0.5, "seed": 2, "params": {"ca": 0.5}, "include_labels": True},
        )
        self.assert_equal(response.status_code, 200, "Representation request failed")
        body = response.json()
        self.assert_true(body["report"]["passed"], "Embedding did not verify")
        self.assert_equal(len(body["labels"]), 32, "One label per vertex")
        self.log(f"  ✓ Verified representation in {body['d']} coordinates")

    def test_lower_bounds(self):
        response = requests.get(f"{self.base_url}/prague/lower-bounds", params={"n": 1024, "p": 0.5})
        self.assert_equal(response.status_code, 200, "Lower bound request failed")
        self.assert_equal(response.json()["s"], 20, "Clique size threshold at n=1024, p=0.5")

    # ========== Experiment Tests ==========

    def test_experiment_job(self):
        config = {"mode": "lowerbound", "grid": {"n": [64, 128], "p": [0.5], "eps": [0.1]}, "seeds": [0, 1]}
        response = requests.post(f"{self.base_url}/experiments/", json=config)
        self.assert_equal(response.status_code, 202, "Experiment submission failed")
        job_id = response.json()["job_id"]

        deadline = time.time() + 60
        status = {}
        while time.time() < deadline:
            status = requests.get(f"{self.base_url}/experiments/{job_id}").json()
            if status["status"] in ("done", "failed"):
                break
            time.sleep(0.5)
        self.assert_equal(status.get("status"), "done", f"Job {job_id} did not finish")
        self.assert_equal(status["trials"], 4, "One trial per grid point and seed")

    def test_unknown_experiment(self):
        response = requests.get(f"{self.base_url}/experiments/does-not-exist")
        self.assert_equal(response.status_code, 404, "Unknown job should be 404")

    # ========== Run All Tests ==========

    def run_all_tests(self):
        """Run all tests in order"""
        self.log("\n" + "="*60, YELLOW)
        self.log("  SMOKE TESTS - Prague Dimension Lab API", YELLOW)
        self.log("="*60 + "\n", YELLOW)

        # Check if server is running
        try:
            response = requests.get(f"{self.base_url}/health", timeout=2)
            if response.status_code != 200:
                self.log("✗ Server health check failed!", RED)
                return False
        except requests.exceptions.RequestException:
            self.log("✗ Cannot connect to server. Is it running?", RED)
            self.log(f"  Expected URL: {self.base_url}", RED)
            return False

        self.log("✓ Server is running\n", GREEN)

        self.log("=" * 60, YELLOW)
        self.log("ENGINE TESTS", YELLOW)
        self.log("=" * 60, YELLOW)
        self.test("Clique Partition", self.test_partition)
        self.test("Partition Rejects Bad p", self.test_partition_rejects_bad_p)
        self.test("Hypergraph Coloring", self.test_coloring)
        self.test("Pseudo-randomness Audit", self.test_audit)
        self.test("Product Representation", self.test_prague)
        self.test("Lower Bounds", self.test_lower_bounds)

        self.log("\n" + "=" * 60, YELLOW)
        self.log("EXPERIMENT TESTS", YELLOW)
        self.log("=" * 60, YELLOW)
        self.test("Experiment Job", self.test_experiment_job)
        self.test("Unknown Experiment", self.test_unknown_experiment)

        self.print_summary()

        failed_tests = [t for t in self.test_results if not t[1]]
        return len(failed_tests) == 0

    def print_summary(self):
        """Print test summary"""
        total = len(self.test_results)
        passed = sum(1 for t in self.test_results if t[1])
        failed = total - passed

        self.log("\n" + "="*60, YELLOW)
        self.log("TEST SUMMARY", YELLOW)
        self.log("="*60, YELLOW)
        self.log(f"Total Tests: {total}")
        self.log(f"Passed: {passed}", GREEN)
        if failed > 0:
            self.log(f"Failed: {failed}", RED)
            self.log("\nFailed Tests:", RED)
            for name, success, error in self.test_results:
                if not success:
                    self.log(f"  ✗ {name}", RED)
                    if error:
                        self.log(f"    {error}", RED)
        else:
            self.log(f"Failed: {failed}", GREEN)

        self.log("="*60 + "\n", YELLOW)

        if failed == 0:
            self.log("🎉 ALL TESTS PASSED! 🎉", GREEN)
        else:
            self.log("⚠️  SOME TESTS FAILED", RED)


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Run smoke tests for Prague Dimension Lab API")
    parser.add_argument("--url", default=BASE_URL, help="API base URL")
    args = parser.parse_args()

    tester = APITester(args.url)
    success = tester.run_all_tests()

    sys.exit(0 if success else 1)
