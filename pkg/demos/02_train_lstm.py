"""
Training the LSTM on one axis
=============================

The network is a single 8-unit LSTM followed by three linear dense layers,
trained with Adam on windows of 15 past samples.  Everything is plain numpy.
"""
from pathlib import Path

from grace_acc import forecast, ingest, lstm, preprocess, report
from grace_acc.synthetic import synthetic_day

out = Path("demo_out")
out.mkdir(exist_ok=True)

day = synthetic_day("B", seed=2)
prep = preprocess.prepare(ingest.extract_axis(day, "y"))

# Fewer epochs than the default 300 keeps the demo under a minute.
config = lstm.TrainConfig(epochs=40, rng_seed=5)


def show(epoch, row):
    if epoch % 10 == 0:
        print(f"epoch {epoch:3d}  loss {row[0]:.3e}  val_loss {row[2]:.3e}")


params, history = lstm.fit(prep.train_ds.X, prep.train_ds.Y, config, callback=show)

# Before trusting the hand-written backward pass, compare it with finite differences.
X = lstm.to_model_input(prep.train_ds.X[:8], params)
Y = prep.train_ds.Y[:8]
_, analytic = lstm.loss_and_grad(params, X, Y)
numeric = lstm.numerical_gradient(params, X, Y)
print("max relative gradient error", lstm.relative_error(analytic.flat, numeric.flat).max())

# Checkpoints store every float in hex, so reloading is exact.
lstm.save_checkpoint(params, config, out / "checkpoint.json")
again, _ = lstm.load_checkpoint(out / "checkpoint.json")
assert again == params

rep = forecast.evaluate(params, prep.train_ds, prep.test_ds, prep.scaler, config=config,
                        sat_id="B", axis="y", retained_count=prep.outliers.retained_count,
                        history=history, series=prep.series)
print(rep.scores_1e6())
report.plot_loss(rep, out / "loss_demo.svg")
report.plot_predictions(rep, out / "prediction_demo.svg")
