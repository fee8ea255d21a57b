import sys
import os
import threading
import time

sys.path.append(os.path.join(os.path.dirname(__file__), '../'))

from dvspy.api import Clock, ClusterSpec, DvsOptions, ScenarioSpec, \
    Stream, Transport, aggregate_and_rank, each, generate, run_campaign, \
    run_dvs, scan, summarize  # noqa: E402


def main():
    data = generate(ScenarioSpec('2.1', N=1000, p=500, m=10, seed=7))
    run = run_dvs(ClusterSpec(data.shards), data.family,
                  DvsOptions(k_max=20))
    print(summarize(run)['support'], 'truth:',
          sorted(j + 1 for j in data.support))
    for record in run.ebic.records[:6]:
        print(record.k, round(record.ebic, 3))


def tcp():
    # same shards, workers behind loopback sockets
    data = generate(ScenarioSpec('3.1', N=600, p=100, m=4, seed=1))
    cluster = ClusterSpec(data.shards, transport=Transport.TCP)
    run = run_dvs(cluster, data.family, DvsOptions(k=3))
    print(sorted(run.support), run.comm.to_dict())


def joint_effect():
    # covariate 1 only matters jointly: marginal ranks bury it
    data = generate(ScenarioSpec('1.1', N=600, p=300, m=5, seed=3))
    cluster = ClusterSpec(data.shards)
    utility, _ = aggregate_and_rank(cluster, 'pearson', 20)
    print('pearson rank of covariate 1:', utility.rank_of(0))
    print('dvs:', sorted(int(j) + 1 for j in
                         run_dvs(cluster, data.family).support))


def bench():
    spec = ScenarioSpec('2.2', N=1000, p=300, m=10, seed=0)
    table = run_campaign(spec, ['dvs', 'pearson', 'sirs'], 10, parallel=4)
    table.write_csv(sys.stdout)


def replies():
    # how a round collects gradients: workers push from their threads, the
    # coordinator only sees them on its clock ticks
    clk = Clock()
    got: Stream[int] = Stream(clk)
    count = scan(lambda n, _: n + 1, 0, got)
    each(print, count)

    def worker(i):
        time.sleep(0.1 * i)
        got(i)

    threads = [threading.Thread(target=worker, args=(i, ))
               for i in range(3)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    clk.tick()


if __name__ == '__main__':
    main()
    # tcp()
    # joint_effect()
    # bench()
    # replies()
