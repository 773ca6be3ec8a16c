# -*- coding: utf-8 -*-
import json
import os
from io import StringIO

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from soilqr.cli import main
from soilqr.raster import Raster
from soilqr.tests.fixtures import TemporaryDirectoryMixin, write_grid, write_project


def read(path):
    with open(path, 'rb') as f:
        return f.read()


class CommandTestCase(TemporaryDirectoryMixin, SimpleTestCase):

    def soilqr(self, *args, **kwargs):
        kwargs.setdefault('verbosity', 0)
        call_command('soilqr', *args, **kwargs)

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as cm:
            self.soilqr(*args)
        self.assertEqual(cm.exception.returncode, code)
        return cm.exception


class FitCommandTestCase(CommandTestCase):

    def test_outputs(self):
        config = write_project(self.directory)
        stdout = StringIO()
        self.soilqr('fit', '--config', config, verbosity=1, stdout=stdout)
        out = self.path('out')
        for name in ('encoding_report.json', 'coefficients_qr.csv', 'simple_coefficients_qr.csv',
                     'coefficients_ols.csv', 'fit_summary.csv', 'fit_residuals.csv', 'fit_manifest.json'):
            self.assertTrue(os.path.exists(os.path.join(out, name)), name)
        self.assertIn(os.path.join(out, 'fit_manifest.json'), stdout.getvalue())

        coefficients = pd.read_csv(os.path.join(out, 'coefficients_qr.csv'))
        self.assertEqual(len(coefficients), 12)
        self.assertEqual(list(coefficients['column'][:4]), ['(Intercept)', 'x1', 'x2', 'cls=k1'])
        residuals = pd.read_csv(os.path.join(out, 'fit_residuals.csv'))
        self.assertEqual(list(residuals.columns), ['row', 'tau_0.250', 'tau_0.500', 'tau_0.750'])
        self.assertEqual(len(residuals), 80)

        with open(os.path.join(out, 'encoding_report.json')) as f:
            report = json.load(f)
        self.assertEqual(report['baseline_classes'], [{'covariate': 'cls', 'level': 'k0',
                                                       'count': report['baseline_classes'][0]['count']}])
        self.assertEqual(len(report['final_columns']), 4)

        with open(os.path.join(out, 'fit_manifest.json')) as f:
            manifest = json.load(f)
        self.assertEqual(manifest['command'], 'fit')
        self.assertEqual(manifest['seed'], 11)
        self.assertNotIn('workers', manifest['settings'])
        self.assertEqual([o['file'] for o in manifest['outputs']][0], 'encoding_report.json')
        self.assertEqual([s['state'] for s in manifest['steps']], ['step_completed'] * 5)

    def test_tau_override(self):
        config = write_project(self.directory)
        self.soilqr('fit', '--config', config, '--taus', '0.5', '--out', self.path('median'))
        coefficients = pd.read_csv(self.path('median', 'coefficients_qr.csv'))
        self.assertEqual(set(coefficients['tau']), {0.5})

    def test_invalid_tau(self):
        config = write_project(self.directory)
        error = self.assertExitCode(2, 'fit', '--config', config, '--taus', '0.5,1.5')
        self.assertIn('DomainError', str(error))

    def test_missing_column(self):
        config = write_project(self.directory, schema={'response': 'soc', 'covariates': ['x1']})
        error = self.assertExitCode(2, 'fit', '--config', config)
        self.assertIn("'soc'", str(error))

    def test_empty_table(self):
        config = write_project(self.directory)
        with open(self.path('samples.csv'), 'w') as f:
            f.write('y,x1,x2,cls\n')
        self.assertExitCode(3, 'fit', '--config', config)

    def test_log_of_zero(self):
        config = write_project(self.directory, positive=True)
        samples = pd.read_csv(self.path('samples.csv'))
        samples.loc[4, 'y'] = 0.0
        samples.to_csv(self.path('samples.csv'), index=False)
        error = self.assertExitCode(3, 'fit', '--config', config)
        # The sixth line of the file: header plus five rows.
        self.assertIn('rows: 6', str(error))

    def test_rank_deficient(self):
        config = write_project(self.directory, collinearity_threshold=1.0,
                               schema={'response': 'y', 'covariates': ['x1', 'x1_copy']})
        samples = pd.read_csv(self.path('samples.csv'))
        samples['x1_copy'] = samples['x1']
        samples.to_csv(self.path('samples.csv'), index=False)
        self.assertExitCode(4, 'fit', '--config', config)

    def test_missing_input(self):
        config = write_project(self.directory)
        os.remove(self.path('samples.csv'))
        error = self.assertExitCode(3, 'fit', '--config', config)
        self.assertIn('samples.csv', str(error))

    def test_undecodable_input(self):
        config = write_project(self.directory)
        with open(self.path('samples.csv'), 'wb') as f:
            f.write(b'y,x1,x2,cls\n1.0,0.5,0.5,\xff\n')
        error = self.assertExitCode(3, 'fit', '--config', config)
        self.assertIn('samples.csv', str(error))

    def test_console_script(self):
        config = write_project(self.directory)
        with open(self.path('samples.csv'), 'w') as f:
            f.write('y,x1,x2,cls\n')
        with self.assertRaises(SystemExit) as cm:
            main(['-v', '0', 'fit', '--config', config])
        self.assertEqual(cm.exception.code, 3)


class CvCommandTestCase(CommandTestCase):

    def test_report_is_reproducible(self):
        config = write_project(self.directory, taus=[0.5])
        self.soilqr('cv', '--config', config, '--out', self.path('one'))
        self.soilqr('cv', '--config', config, '--out', self.path('two'), '--workers', '2')
        self.assertEqual(read(self.path('one', 'cv_report.csv')), read(self.path('two', 'cv_report.csv')))
        self.assertEqual(read(self.path('one', 'cv_manifest.json')),
                         read(self.path('two', 'cv_manifest.json')))
        report = pd.read_csv(self.path('one', 'cv_report.csv'))
        self.assertEqual(list(report['n']), [80])
        self.assertLess(report['r1'][0], 1.0)


class BootstrapCommandTestCase(CommandTestCase):

    def test_summaries(self):
        config = write_project(self.directory, taus=[0.5], bootstrap_replicates=60)
        self.soilqr('bootstrap', '--config', config)
        summary = pd.read_csv(self.path('out', 'coefficients.csv'))
        self.assertEqual(list(summary['column']), ['(Intercept)', 'x1', 'x2', 'cls=k1'])
        self.assertTrue(np.all(summary['q25'] <= summary['median']))
        self.assertTrue(np.all(summary['median'] <= summary['q75']))
        self.assertTrue(np.all(summary['n_draws'] == 60))
        self.assertTrue(os.path.exists(self.path('out', 'simple_coefficients.csv')))

        first = read(self.path('out', 'coefficients.csv'))
        self.soilqr('bootstrap', '--config', config, '--out', self.path('again'))
        self.assertEqual(first, read(self.path('again', 'coefficients.csv')))

        self.soilqr('bootstrap', '--config', config, '--seed', '12', '--out', self.path('other'))
        self.assertNotEqual(first, read(self.path('other', 'coefficients.csv')))

    def test_needs_replicates(self):
        config = write_project(self.directory)
        self.assertExitCode(2, 'bootstrap', '--config', config, '--bootstrap-b', '0')


class PredictCommandTestCase(CommandTestCase):

    def test_maps(self):
        config = write_project(self.directory)
        self.soilqr('predict', '--config', config)
        out = self.path('out')
        names = sorted(os.listdir(out))
        self.assertEqual(names, ['iqr_0.250.asc', 'iqr_0.500.asc', 'iqr_0.750.asc', 'predict_manifest.json',
                                 'quantile_0.250.asc', 'quantile_0.500.asc', 'quantile_0.750.asc'])
        maps = [Raster.read(os.path.join(out, name)) for name in names if name.endswith('.asc')]
        for raster in maps:
            np.testing.assert_array_equal(raster.valid, maps[0].valid)
        self.assertFalse(maps[0].valid[0, 0])
        lower, upper = maps[3], maps[5]
        self.assertLess(lower.data[lower.valid].mean(), upper.data[upper.valid].mean())

    def test_without_bootstrap(self):
        config = write_project(self.directory, bootstrap_replicates=0)
        self.soilqr('predict', '--config', config)
        self.assertFalse(any(name.startswith('iqr') for name in os.listdir(self.path('out'))))

    def test_log_response(self):
        config = write_project(self.directory, positive=True, taus=[0.5], bootstrap_replicates=0)
        self.soilqr('predict', '--config', config)
        median = Raster.read(self.path('out', 'quantile_0.500.asc'))
        values = median.data[median.valid]
        self.assertTrue(np.all(values > 5.0))
        self.assertTrue(np.all(values < 30.0))

    def test_log_covariate(self):
        rng = np.random.default_rng(5)
        area = rng.uniform(0.5, 20.0, 200)
        y = 1.0 + 2.0 * np.log(area) + rng.normal(0.0, 0.1, 200)
        config = write_project(self.directory, taus=[0.5], bootstrap_replicates=0,
                               schema={'response': 'y',
                                       'covariates': [{'name': 'area', 'transform': 'log'}]},
                               covariate_rasters={'area': 'area.asc'}, class_codes={})
        pd.DataFrame({'y': y, 'area': area}).to_csv(self.path('samples.csv'), index=False)
        write_grid(self.path('area.asc'), [[np.e, 0.0, np.e], [np.e, -1.0, np.e]])
        self.soilqr('predict', '--config', config)
        median = Raster.read(self.path('out', 'quantile_0.500.asc'))
        np.testing.assert_array_equal(median.valid, [[True, False, True], [True, False, True]])
        np.testing.assert_allclose(median.data[median.valid], 3.0, atol=0.1)

    def test_missing_raster_file(self):
        config = write_project(self.directory, bootstrap_replicates=0)
        os.remove(self.path('x2.asc'))
        error = self.assertExitCode(3, 'predict', '--config', config)
        self.assertIn('x2.asc', str(error))

    def test_constant_covariates(self):
        config = write_project(self.directory, taus=[0.5], bootstrap_replicates=0)
        for name in ('x1', 'x2'):
            write_grid(self.path('%s.asc' % name), np.full((4, 5), 0.5))
        write_grid(self.path('cls.asc'), np.ones((4, 5)))
        self.soilqr('predict', '--config', config)
        median = Raster.read(self.path('out', 'quantile_0.500.asc'))
        self.assertTrue(np.allclose(median.values, median.values[0, 0]))

    def test_workers_give_identical_files(self):
        config = write_project(self.directory, taus=[0.25, 0.75])
        self.soilqr('predict', '--config', config, '--out', self.path('one'), '--workers', '1')
        self.soilqr('predict', '--config', config, '--out', self.path('two'), '--workers', '2')
        names = sorted(os.listdir(self.path('one')))
        self.assertEqual(names, sorted(os.listdir(self.path('two'))))
        for name in names:
            self.assertEqual(read(self.path('one', name)), read(self.path('two', name)), name)

    def test_missing_raster(self):
        config = write_project(self.directory, covariate_rasters={'x1': 'x1.asc', 'cls': 'cls.asc'},
                               bootstrap_replicates=0)
        self.assertExitCode(3, 'predict', '--config', config)


class CompareCommandTestCase(CommandTestCase):

    def setUp(self):
        super(CompareCommandTestCase, self).setUp()
        values = np.random.default_rng(4).uniform(1.0, 3.0, (6, 6))
        values[5, 5] = np.nan
        write_grid(self.path('reference.asc'), values)
        write_grid(self.path('shifted.asc'), values + 5.0)
        write_grid(self.path('coarse.asc'), np.full((3, 3), 2.0), cellsize=2.0)

    def summary(self, name):
        frame = pd.read_csv(self.path('out', name, 'residuals_summary.csv'))
        return dict(zip(frame['statistic'], frame['value']))

    def test_benchmarks(self):
        config = write_project(self.directory, reference_map='reference.asc',
                               benchmarks={'same': 'reference.asc', 'shifted': 'shifted.asc',
                                           'coarse': 'coarse.asc'})
        self.soilqr('compare', '--config', config)
        same = self.summary('same')
        self.assertEqual(same['mean'], 0.0)
        self.assertEqual(same['fit_through_origin_slope'], 1.0)
        # Harmonized to the 2 x 2 cells of the coarse benchmark
        self.assertEqual(same['count'], 9)
        self.assertAlmostEqual(self.summary('shifted')['mean'], -5.0)
        self.assertEqual(len(pd.read_csv(self.path('out', 'coarse', 'qq.csv'))), 9)
        self.assertTrue(os.path.exists(self.path('out', 'compare_manifest.json')))

    def test_predicted_median(self):
        config = write_project(self.directory, taus=[0.5], bootstrap_replicates=0,
                               benchmarks={'same': 'reference.asc'})
        write_grid(self.path('reference.asc'), np.ones((4, 5)))
        self.soilqr('compare', '--config', config)
        self.assertEqual(self.summary('same')['count'], 19)

    def test_needs_benchmarks(self):
        config = write_project(self.directory, reference_map='reference.asc')
        self.assertExitCode(2, 'compare', '--config', config)
